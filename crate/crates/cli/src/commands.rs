use fbms_core::certify::{certify, index_2d, CertificateJson, IndexCertificate};
use fbms_core::closed_form::{closed_form_dtn_report, closed_form_fixed_report};
use fbms_core::discrete::{assemble, CoefficientField, Resolution};
use fbms_core::geometry::{free_boundary_residual, jacobi_field_residual, JacobiFieldKind, Vec3};
use fbms_core::mode1d::{
    assemble_fixed_spectrum, assemble_full_spectrum, steklov_spectrum_1d_banded, Mode1dMethod,
    ModeOperator, DEFAULT_GRID_POINTS,
};
use fbms_core::report::ReportJson;
use fbms_core::spectral::{observed_order, spectra_2d};
use fbms_core::FbmsError;
use serde::Serialize;

use crate::config::{Method, RunConfig};
use crate::output::{emit, Document, Tabular};

type Result<T> = std::result::Result<T, FbmsError>;

fn pipelines(method: Method) -> Vec<Method> {
    match method {
        Method::All => vec![Method::ClosedForm, Method::Mode1d, Method::Full2d],
        m => vec![m],
    }
}

/// Run one job per pipeline on its own thread and keep the input order.
fn run_concurrently<T: Send>(
    methods: &[Method],
    job: impl Fn(Method) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = methods
            .iter()
            .map(|&m| {
                let job = &job;
                s.spawn(move || job(m))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(FbmsError::solver("pipeline thread panicked")))
            })
            .collect()
    })
}

fn catenoid(cfg: &RunConfig) -> Result<fbms_core::geometry::CatenoidParams> {
    cfg.params()
        .ok_or_else(|| FbmsError::validation("this method needs a catenoid surface"))
}

#[derive(Debug, Serialize)]
pub struct SpectrumResult {
    pub method: String,
    pub fixed: ReportJson,
    pub dtn: ReportJson,
}

#[derive(Debug, Serialize)]
pub struct SpectrumOutput {
    pub spectra: Vec<SpectrumResult>,
}

impl Tabular for SpectrumOutput {
    fn csv(&self) -> String {
        let mut out = String::from("method,spectrum,value,multiplicity,labels\n");
        for s in &self.spectra {
            for (name, r) in [("fixed", &s.fixed), ("jacobi_steklov", &s.dtn)] {
                for e in &r.entries {
                    let labels: Vec<String> = e
                        .labels
                        .iter()
                        .map(|l| format!("{}-{}", l.n, l.parity))
                        .collect();
                    out.push_str(&format!(
                        "{},{name},{:.15e},{},{}\n",
                        s.method,
                        e.value,
                        e.multiplicity,
                        labels.join(" ")
                    ));
                }
            }
        }
        out
    }
}

fn spectrum_for(cfg: &RunConfig, method: Method) -> Result<SpectrumResult> {
    let tol = &cfg.tol;
    let (name, fixed, dtn) = match method {
        Method::ClosedForm => (
            "closed-form".to_string(),
            closed_form_fixed_report(tol),
            closed_form_dtn_report(catenoid(cfg)?, cfg.n_max, tol),
        ),
        Method::Mode1d => {
            let p = catenoid(cfg)?;
            let dtn = assemble_full_spectrum(cfg.n_max, p, Mode1dMethod::Shooting, tol)?;
            let fixed = assemble_fixed_spectrum(cfg.n_max, p, 3, DEFAULT_GRID_POINTS, tol)?;
            ("mode-1d-shooting".to_string(), fixed, dtn)
        }
        Method::Full2d => {
            let op = assemble(&cfg.chart, &CoefficientField::ball(), cfg.resolution(), tol)?;
            let k = 4 * cfg.n_max as usize + 1;
            let s = spectra_2d(&op, k, tol)?;
            (s.dtn.method.clone(), s.fixed.report, s.dtn_report)
        }
        Method::All => unreachable!("expanded by pipelines()"),
    };
    Ok(SpectrumResult {
        method: name,
        fixed: fixed.to_json(),
        dtn: dtn.to_json(),
    })
}

pub fn spectrum(cfg: &RunConfig) -> Result<()> {
    let spectra = run_concurrently(&pipelines(cfg.method), |m| spectrum_for(cfg, m))?;
    emit(
        cfg,
        &Document::new("spectrum", cfg, SpectrumOutput { spectra }),
    )
}

#[derive(Debug, Serialize)]
pub struct IndexOutput {
    pub certificates: Vec<CertificateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

impl Tabular for IndexOutput {
    fn csv(&self) -> String {
        let mut out =
            String::from("method,alpha,fixed_negative,fixed_null,dtn_below,dtn_at,index,nullity\n");
        for c in &self.certificates {
            let k = c.counts;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.method,
                c.alpha,
                k.fixed_negative,
                k.fixed_null,
                k.dtn_below,
                k.dtn_at,
                c.index,
                c.nullity
            ));
        }
        out
    }
}

fn certificate_for(cfg: &RunConfig, method: Method) -> Result<IndexCertificate> {
    let tol = &cfg.tol;
    match method {
        Method::ClosedForm => {
            let dtn = closed_form_dtn_report(catenoid(cfg)?, cfg.n_max, tol);
            let mut cert = certify(
                &closed_form_fixed_report(tol),
                &dtn,
                cfg.alpha_or_ball(),
                tol,
            )?;
            cert.method = "closed-form".into();
            Ok(cert)
        }
        Method::Mode1d => fbms_core::mode1d::mode_1d_index(
            catenoid(cfg)?,
            cfg.n_max,
            Mode1dMethod::Shooting,
            DEFAULT_GRID_POINTS,
            cfg.alpha_or_ball(),
            tol,
        ),
        Method::Full2d => Ok(index_2d(&cfg.chart, cfg.resolution(), cfg.alpha, tol)?.certificate),
        Method::All => unreachable!("expanded by pipelines()"),
    }
}

pub fn index(cfg: &RunConfig) -> Result<()> {
    let certs = run_concurrently(&pipelines(cfg.method), |m| certificate_for(cfg, m))?;
    let verdict = (certs.len() > 1).then(|| {
        let first = certs[0].counts;
        if certs.iter().all(|c| c.counts == first) {
            "consistent".to_string()
        } else {
            "inconsistent".to_string()
        }
    });
    let out = IndexOutput {
        certificates: certs.iter().map(|c| c.to_json()).collect(),
        verdict,
    };
    emit(cfg, &Document::new("index", cfg, out))
}

#[derive(Debug, Serialize)]
pub struct ConvergeRow {
    pub resolution: String,
    pub k: usize,
    pub value: f64,
    pub exact: f64,
    pub abs_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ConvergeOutput {
    pub rows: Vec<ConvergeRow>,
}

impl Tabular for ConvergeOutput {
    fn csv(&self) -> String {
        let mut out = String::from("resolution,k,value,exact,abs_error,order\n");
        for r in &self.rows {
            let order = r.order.map_or(String::new(), |o| format!("{o:.4}"));
            out.push_str(&format!(
                "{},{},{:.15e},{:.15e},{:.6e},{order}\n",
                r.resolution, r.k, r.value, r.exact, r.abs_error
            ));
        }
        out
    }
}

/// Number of lowest Jacobi-Steklov values tracked by `converge`.
const CONVERGE_K: usize = 5;
/// Errors below this are roundoff; no order is reported for them.
const ORDER_FLOOR: f64 = 1e-11;

fn lowest_1d_raw(cfg: &RunConfig, points: usize) -> Result<Vec<f64>> {
    let p = catenoid(cfg)?;
    let mut v = Vec::new();
    for n in 0..=2 {
        for b in steklov_spectrum_1d_banded(&ModeOperator::new(p, n, points)?)? {
            if let Some(d) = b.delta {
                v.extend(std::iter::repeat_n(d, if n == 0 { 1 } else { 2 }));
            }
        }
    }
    v.sort_by(f64::total_cmp);
    v.truncate(CONVERGE_K);
    Ok(v)
}

fn lowest_2d(cfg: &RunConfig, res: Resolution) -> Result<Vec<f64>> {
    let op = assemble(&cfg.chart, &CoefficientField::ball(), res, &cfg.tol)?;
    Ok(spectra_2d(&op, CONVERGE_K, &cfg.tol)?
        .dtn_report
        .eigenvalues)
}

fn exact_lowest(cfg: &RunConfig) -> Result<Vec<f64>> {
    match cfg.params() {
        Some(p) => {
            let r = closed_form_dtn_report(p, 2, &cfg.tol);
            Ok(r.eigenvalues.into_iter().take(CONVERGE_K).collect())
        }
        None if matches!(cfg.descriptor, fbms_core::descriptor::ChartDescriptor::Disk) => {
            // Steklov eigenvalues of the unit disk: 0, 1, 1, 2, 2, ...
            Ok((0..CONVERGE_K).map(|k| k.div_ceil(2) as f64).collect())
        }
        None => Err(FbmsError::validation(
            "converge needs a surface with a known spectrum (catenoid or disk)",
        )),
    }
}

pub fn converge(cfg: &RunConfig) -> Result<()> {
    let exact = exact_lowest(cfg)?;
    let mut rows: Vec<ConvergeRow> = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for &res in &cfg.resolutions {
        let values = match cfg.method {
            Method::Mode1d => lowest_1d_raw(cfg, res.nt)?,
            Method::Full2d => lowest_2d(cfg, res)?,
            m => {
                return Err(FbmsError::validation(format!(
                    "converge supports mode_1d and full_2d, not {m:?}"
                )))
            }
        };
        let errors: Vec<f64> = values
            .iter()
            .zip(&exact)
            .map(|(v, e)| (v - e).abs())
            .collect();
        for (k, (&value, &exact)) in values.iter().zip(&exact).enumerate() {
            let order = prev.as_ref().and_then(|p| {
                let coarse = (p[k] - exact).abs();
                (coarse > ORDER_FLOOR && errors[k] > ORDER_FLOOR)
                    .then(|| observed_order(coarse, errors[k]))
            });
            rows.push(ConvergeRow {
                resolution: if cfg.method == Method::Mode1d {
                    res.nt.to_string()
                } else {
                    res.to_string()
                },
                k: k + 1,
                value,
                exact,
                abs_error: errors[k],
                order,
            });
        }
        prev = Some(values);
    }
    emit(
        cfg,
        &Document::new("converge", cfg, ConvergeOutput { rows }),
    )
}

#[derive(Debug, Serialize)]
pub struct JacobiCheck {
    pub field: String,
    pub max_abs: f64,
    pub relative: f64,
}

#[derive(Debug, Serialize)]
pub struct GeometryOutput {
    pub orientation: String,
    pub free_boundary_residual: f64,
    pub jacobi_fields: Vec<JacobiCheck>,
}

impl Tabular for GeometryOutput {
    fn csv(&self) -> String {
        let mut out = String::from("check,max_abs,relative\n");
        out.push_str(&format!(
            "free_boundary,{:.6e},\n",
            self.free_boundary_residual
        ));
        for j in &self.jacobi_fields {
            out.push_str(&format!(
                "jacobi_{},{:.6e},{:.6e}\n",
                j.field, j.max_abs, j.relative
            ));
        }
        out
    }
}

/// Sample count per direction for the free-boundary residual.
const BOUNDARY_SAMPLES: usize = 64;

pub fn geometry_check(cfg: &RunConfig) -> Result<()> {
    let res = cfg.resolution();
    let fields = [
        ("nu_e1", JacobiFieldKind::NormalComponent(Vec3::x())),
        ("nu_e2", JacobiFieldKind::NormalComponent(Vec3::y())),
        ("nu_e3", JacobiFieldKind::NormalComponent(Vec3::z())),
        ("zeta", JacobiFieldKind::Support),
        ("rotation_e1", JacobiFieldKind::rotation_about(Vec3::x())),
        ("rotation_e3", JacobiFieldKind::rotation_about(Vec3::z())),
    ];
    let mut jacobi_fields = Vec::new();
    for (name, f) in fields {
        let r = jacobi_field_residual(&cfg.chart, f, (res.nt, res.ntheta))?;
        jacobi_fields.push(JacobiCheck {
            field: name.into(),
            max_abs: r.max_abs,
            relative: r.relative,
        });
    }
    let out = GeometryOutput {
        orientation: cfg.chart.orientation_note.clone(),
        free_boundary_residual: free_boundary_residual(&cfg.chart, BOUNDARY_SAMPLES)?,
        jacobi_fields,
    };
    emit(cfg, &Document::new("geometry-check", cfg, out))
}
