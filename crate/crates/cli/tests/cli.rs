use std::process::{Command, Output};

use serde_json::Value;

fn fbms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbms"))
        .args(args)
        .output()
        .expect("fbms runs")
}

fn json(args: &[&str]) -> Value {
    let out = fbms(args);
    assert!(
        out.status.success(),
        "fbms {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn values(report: &Value) -> Vec<f64> {
    report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|e| {
            let n = e["multiplicity"].as_u64().unwrap() as usize;
            std::iter::repeat_n(e["value"].as_f64().unwrap(), n)
        })
        .collect()
}

#[test]
fn closed_form_spectrum_is_the_default_on_the_catenoid() {
    let doc = json(&["spectrum"]);
    assert_eq!(doc["run"]["method"], "closed_form");
    let dtn = values(&doc["result"]["spectra"][0]["dtn"]);
    let expected = [
        -1.0,
        -1.0,
        1.0 / 1.199_678_640_257_808_3f64.sinh().powi(2),
        1.0,
        1.0,
    ];
    for (v, e) in dtn.iter().zip(expected) {
        assert!((v - e).abs() < 1e-12, "{v} vs {e}");
    }
}

#[test]
fn disk_steklov_spectrum_from_the_2d_pipeline() {
    let doc = json(&["spectrum", "--surface", "disk", "--resolution", "32"]);
    let dtn = values(&doc["result"]["spectra"][0]["dtn"]);
    for (v, e) in dtn.iter().zip([0.0, 1.0, 1.0, 2.0, 2.0]) {
        assert!((v - e).abs() < 2e-2, "{dtn:?}");
    }
}

#[test]
fn closed_form_on_a_disk_is_a_usage_error() {
    let out = fbms(&["spectrum", "--surface", "disk", "--method", "closed_form"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("critical catenoid"));
}

#[test]
fn all_pipelines_agree_on_the_critical_catenoid() {
    let doc = json(&["index", "--method", "all", "--resolution", "32"]);
    assert_eq!(doc["result"]["verdict"], "consistent");
    let certs = doc["result"]["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 3);
    for c in certs {
        assert_eq!(
            (c["index"].as_u64(), c["nullity"].as_u64()),
            (Some(4), Some(3)),
            "{c}"
        );
    }
}

#[test]
fn disk_has_index_one() {
    let doc = json(&["index", "--surface", "disk", "--resolution", "24"]);
    let c = &doc["result"]["certificates"][0];
    assert_eq!(
        (c["index"].as_u64(), c["nullity"].as_u64()),
        (Some(1), Some(2))
    );
}

#[test]
fn small_alpha_drops_the_one_eigenvalue_above_it() {
    let doc = json(&["index", "--alpha", "0.2"]);
    assert_eq!(doc["result"]["certificates"][0]["index"], 3);
}

#[test]
fn strict_mode_aborts_on_the_discrete_kernel() {
    let out = fbms(&[
        "index",
        "--method",
        "full_2d",
        "--resolution",
        "24",
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("borderline"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["spectrum", "--surface", "disk", "--resolution", "16"];
    assert_eq!(fbms(&args).stdout, fbms(&args).stdout);
    let cf = ["index"];
    assert_eq!(fbms(&cf).stdout, fbms(&cf).stdout);
}

#[test]
fn converge_reports_no_order_for_a_single_level() {
    let out = fbms(&[
        "converge",
        "--surface",
        "disk",
        "--resolution",
        "16",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.ends_with(',')), "{text}");
}

#[test]
fn converge_order_is_two_for_the_1d_solver() {
    let doc = json(&["converge", "--method", "mode_1d", "--resolution", "256,512"]);
    let rows = doc["result"]["rows"].as_array().unwrap();
    let order = rows.last().unwrap()["order"].as_f64().unwrap();
    assert!((order - 2.0).abs() < 0.05, "{order}");
}

#[test]
fn misspelled_tolerance_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tol.toml");
    std::fs::write(&path, "cluster_tol_2dd = 1e-3\n").unwrap();
    let out = fbms(&["index", "--tol-profile", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cluster_tol_2dd"));
}

#[test]
fn geometry_check_on_the_catenoid() {
    let doc = json(&["geometry-check", "--resolution", "64"]);
    assert!(doc["result"]["free_boundary_residual"].as_f64().unwrap() < 1e-12);
    for f in doc["result"]["jacobi_fields"].as_array().unwrap() {
        assert!(f["relative"].as_f64().unwrap() < 1e-3, "{f}");
    }
}
