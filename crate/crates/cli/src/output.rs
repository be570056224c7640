use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use fbms_core::report::SCHEMA_VERSION;
use fbms_core::tolerance::ToleranceProfile;
use fbms_core::FbmsError;
use serde::Serialize;

use crate::config::{Format, Method, RunConfig};

pub fn version_string() -> String {
    format!(
        "fbms {} ({})",
        env!("CARGO_PKG_VERSION"),
        env!("FBMS_GIT_DESCRIBE")
    )
}

#[derive(Debug, Serialize)]
pub struct SurfaceSummary {
    pub name: String,
    pub half_height: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub method: Method,
    pub resolutions: Vec<String>,
    pub n_max: u32,
    pub alpha: Option<f64>,
}

/// Top-level JSON document. No field depends on the clock unless
/// `--stamp` is given.
#[derive(Debug, Serialize)]
pub struct Document<T: Serialize> {
    pub schema: u32,
    pub version: String,
    pub command: &'static str,
    pub surface: SurfaceSummary,
    pub run: RunSummary,
    pub tolerances: ToleranceProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    pub result: T,
}

impl<T: Serialize> Document<T> {
    pub fn new(command: &'static str, cfg: &RunConfig, result: T) -> Self {
        Document {
            schema: SCHEMA_VERSION,
            version: version_string(),
            command,
            surface: SurfaceSummary {
                name: cfg.chart.name.clone(),
                half_height: cfg.params().map(|p| p.half_height),
            },
            run: RunSummary {
                method: cfg.method,
                resolutions: cfg.resolutions.iter().map(|r| r.to_string()).collect(),
                n_max: cfg.n_max,
                alpha: cfg.alpha,
            },
            tolerances: cfg.tol.clone(),
            generated_unix: cfg.stamp.then(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs())
            }),
            result,
        }
    }
}

/// Anything that can be projected to CSV.
pub trait Tabular {
    fn csv(&self) -> String;
}

pub fn emit<T: Serialize + Tabular>(cfg: &RunConfig, doc: &Document<T>) -> Result<(), FbmsError> {
    let text = match cfg.format {
        Format::Json => {
            let mut s =
                serde_json::to_string_pretty(doc).map_err(|e| FbmsError::solver(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => doc.result.csv(),
    };
    let io = |e: std::io::Error| FbmsError::validation(format!("cannot write output: {e}"));
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(io),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(io),
    }
}
