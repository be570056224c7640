use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fbms_core::descriptor::ChartDescriptor;
use fbms_core::discrete::Resolution;
use fbms_core::geometry::{CatenoidParams, SurfaceChart};
use fbms_core::tolerance::ToleranceProfile;
use fbms_core::FbmsError;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[value(name = "closed_form")]
    ClosedForm,
    #[value(name = "mode_1d")]
    Mode1d,
    #[value(name = "full_2d")]
    Full2d,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// `catenoid`, `disk`, an inline JSON descriptor, or `@FILE` holding one.
    #[arg(long, default_value = "catenoid")]
    pub surface: String,
    /// Defaults to closed_form on the critical catenoid and full_2d elsewhere.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Grid `NxM` (t by theta); `converge` accepts a comma-separated list.
    #[arg(long)]
    pub resolution: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub n_max: u32,
    /// Boundary constant the Jacobi-Steklov spectrum is counted against.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// TOML file overriding any subset of the tolerance profile.
    #[arg(long, value_name = "FILE")]
    pub tol_profile: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Abort (exit 4) when an eigenvalue is within the strict factor of a cut.
    #[arg(long)]
    pub strict: bool,
    /// Embed the generation time in the output.
    #[arg(long)]
    pub stamp: bool,
}

pub const DEFAULT_RESOLUTION: usize = 128;
/// Default refinement sequence of `converge` for the 2D pipeline.
pub const CONVERGE_LEVELS_2D: [usize; 3] = [32, 64, 128];
/// Default grid point counts of `converge` for the 1D pipeline.
pub const CONVERGE_POINTS_1D: [usize; 4] = [128, 256, 512, 1024];

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub descriptor: ChartDescriptor,
    pub chart: SurfaceChart,
    pub method: Method,
    pub resolutions: Vec<Resolution>,
    pub n_max: u32,
    pub alpha: Option<f64>,
    pub tol: ToleranceProfile,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub stamp: bool,
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self, FbmsError> {
        let descriptor = read_descriptor(&a.surface)?;
        let chart = descriptor.build()?;
        let mut tol = match &a.tol_profile {
            Some(p) => load_tolerances(p)?,
            None => ToleranceProfile::default(),
        };
        if a.strict {
            tol.strict = true;
        }
        let critical = is_critical_catenoid(&descriptor);
        let method = a.method.unwrap_or(if critical {
            Method::ClosedForm
        } else {
            Method::Full2d
        });
        match method {
            Method::ClosedForm | Method::All if !critical => {
                return Err(FbmsError::validation(format!(
                    "method {method:?} needs the critical catenoid (closed forms exist only there)"
                )))
            }
            Method::Mode1d if !descriptor.is_catenoid() => {
                return Err(FbmsError::validation(
                    "method mode_1d needs a catenoid surface",
                ))
            }
            _ => {}
        }
        if a.n_max < 1 {
            return Err(FbmsError::validation("--n-max must be at least 1"));
        }
        if let Some(al) = a.alpha {
            if !al.is_finite() {
                return Err(FbmsError::validation("--alpha must be finite"));
            }
        }
        let resolutions = match &a.resolution {
            Some(s) => s
                .split(',')
                .map(parse_resolution)
                .collect::<Result<Vec<_>, _>>()?,
            None => vec![Resolution::square(DEFAULT_RESOLUTION)],
        };
        Ok(RunConfig {
            descriptor,
            chart,
            method,
            resolutions,
            n_max: a.n_max,
            alpha: a.alpha,
            tol,
            out: a.out.clone(),
            format: a.format,
            stamp: a.stamp,
        })
    }

    /// Like [`from_args`](Self::from_args), with a refinement sequence as
    /// the default resolution list.
    pub fn for_converge(a: &CommonArgs) -> Result<Self, FbmsError> {
        let mut cfg = Self::from_args(a)?;
        if a.resolution.is_none() {
            let levels: &[usize] = match cfg.method {
                Method::Mode1d => &CONVERGE_POINTS_1D,
                _ => &CONVERGE_LEVELS_2D,
            };
            cfg.resolutions = levels.iter().map(|&n| Resolution::square(n)).collect();
        }
        Ok(cfg)
    }

    pub fn params(&self) -> Option<CatenoidParams> {
        self.chart.catenoid_params()
    }

    pub fn resolution(&self) -> Resolution {
        self.resolutions[0]
    }

    pub fn alpha_or_ball(&self) -> f64 {
        self.alpha.unwrap_or(1.0)
    }
}

fn is_critical_catenoid(d: &ChartDescriptor) -> bool {
    match d {
        ChartDescriptor::Catenoid { half_height: None } => true,
        ChartDescriptor::Catenoid {
            half_height: Some(t),
        } => (t - CatenoidParams::critical().half_height).abs() < 1e-12,
        _ => false,
    }
}

fn read_descriptor(s: &str) -> Result<ChartDescriptor, FbmsError> {
    match s.strip_prefix('@') {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                FbmsError::validation(format!("cannot read surface file {path}: {e}"))
            })?;
            ChartDescriptor::parse(&text)
        }
        None => ChartDescriptor::parse(s),
    }
}

/// `N` or `NxM`.
pub fn parse_resolution(s: &str) -> Result<Resolution, FbmsError> {
    let bad = || FbmsError::validation(format!("resolution must look like 128x128, got {s:?}"));
    let s = s.trim();
    let (a, b) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let nt = a.trim().parse::<usize>().map_err(|_| bad())?;
    let nth = b.trim().parse::<usize>().map_err(|_| bad())?;
    if nt == 0 || nth == 0 {
        return Err(bad());
    }
    Ok(Resolution::new(nt, nth))
}

/// Tolerance overrides from TOML; unknown keys are rejected so that a typo
/// does not silently fall back to a default.
pub fn load_tolerances(path: &Path) -> Result<ToleranceProfile, FbmsError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FbmsError::validation(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text)
        .map_err(|e| FbmsError::validation(format!("{}: {e}", path.display())))?;
    let known = toml::Table::try_from(ToleranceProfile::default())
        .map_err(|e| FbmsError::validation(e.to_string()))?;
    if let Some(k) = table.keys().find(|k| !known.contains_key(*k)) {
        return Err(FbmsError::validation(format!(
            "unknown tolerance {k:?} in {}",
            path.display()
        )));
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| FbmsError::validation(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolutions_parse() {
        let r = parse_resolution("64x32").unwrap();
        assert_eq!((r.nt, r.ntheta), (64, 32));
        assert_eq!(parse_resolution("48").unwrap().ntheta, 48);
        assert!(parse_resolution("x12").is_err());
        assert!(parse_resolution("0x4").is_err());
    }

    #[test]
    fn tolerance_files_override_and_reject_typos() {
        let dir = std::env::temp_dir().join(format!("fbms-tol-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let good = dir.join("good.toml");
        std::fs::write(&good, "null_tol_2d = 2e-3\nstrict = true\n").unwrap();
        let tol = load_tolerances(&good).unwrap();
        assert_eq!(tol.null_tol_2d, 2e-3);
        assert!(tol.strict);
        let bad = dir.join("bad.toml");
        std::fs::write(&bad, "nul_tol_2d = 2e-3\n").unwrap();
        assert!(load_tolerances(&bad).is_err());
    }
}
