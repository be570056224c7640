//! Numerical tolerances shared by every layer.
//!
//! A single [`ToleranceProfile`] value carries all thresholds; the CLI can
//! override any subset of them from a TOML file.

use serde::{Deserialize, Serialize};

/// Resolution at which the reference 2D tolerances are quoted.
pub const REFERENCE_RESOLUTION: f64 = 128.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceProfile {
    /// `| |nu| - 1 |` bound for point geometry.
    pub unit_normal: f64,
    /// Bound on `<nu, X_t>` and `<nu, X_theta>`.
    pub tangency: f64,
    /// Bound on the mean curvature of a minimal chart.
    pub minimality: f64,
    /// Metric determinants below this are singular.
    pub metric_degeneracy: f64,
    /// Bound on the free-boundary residual of the built-in charts.
    pub free_boundary: f64,
    /// Finite-difference step for charts without analytic derivatives,
    /// relative to the domain extent.
    pub fd_step_rel: f64,
    /// Interval width at which root bisection stops.
    pub bisection_width: f64,
    /// Inner radius excised around the polar singularity of the disk.
    pub disk_excision: f64,
    pub ode_atol: f64,
    pub ode_rtol: f64,
    /// `|f(T)| / ||f||_inf` below which a shooting branch hits the
    /// fixed-boundary kernel and is deflated.
    pub deflation_threshold: f64,
    /// Multiplicity grouping for closed-form reports.
    pub cluster_tol_exact: f64,
    /// Multiplicity grouping (and the band around alpha) for 1D numeric reports.
    pub cluster_tol_numeric: f64,
    /// Band around alpha / multiplicity grouping for 2D reports at the
    /// reference resolution; rescaled by `(128 / N)^2`.
    pub cluster_tol_2d: f64,
    /// Null band of the fixed-boundary problem at the reference resolution;
    /// rescaled by `(128 / N)^2`.
    pub null_tol_2d: f64,
    /// Null band for the 1D banded and grid-free solvers.
    pub null_tol_1d: f64,
    /// Eigenvalues within this factor of a cut are reported as borderline.
    pub borderline_factor: f64,
    /// Eigenvalues within this factor of a cut abort in strict mode.
    pub strict_factor: f64,
    pub strict: bool,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile {
            unit_normal: 1e-12,
            tangency: 1e-10,
            minimality: 1e-8,
            metric_degeneracy: 1e-14,
            free_boundary: 1e-10,
            fd_step_rel: 1e-5,
            bisection_width: 1e-14,
            disk_excision: 1e-3,
            ode_atol: 1e-12,
            ode_rtol: 1e-10,
            deflation_threshold: 1e-12,
            cluster_tol_exact: 1e-7,
            cluster_tol_numeric: 1e-4,
            cluster_tol_2d: 5e-3,
            null_tol_2d: 1e-3,
            null_tol_1d: 1e-6,
            borderline_factor: 10.0,
            strict_factor: 3.0,
            strict: false,
        }
    }
}

/// The two cuts a spectrum report is counted against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutTolerances {
    /// `|lambda| <= null_tol` counts as a fixed-boundary kernel element.
    pub null_tol: f64,
    /// Multiplicity grouping and the band `|delta - alpha| <= cluster_tol`.
    pub cluster_tol: f64,
}

impl ToleranceProfile {
    fn resolution_scale(nt: usize, ntheta: usize) -> f64 {
        let r2 = REFERENCE_RESOLUTION * REFERENCE_RESOLUTION;
        0.5 * (r2 / (nt * nt) as f64 + r2 / (ntheta * ntheta) as f64)
    }

    pub fn exact_cuts(&self) -> CutTolerances {
        CutTolerances {
            null_tol: self.cluster_tol_exact,
            cluster_tol: self.cluster_tol_exact,
        }
    }

    pub fn mode_1d_cuts(&self) -> CutTolerances {
        CutTolerances {
            null_tol: self.null_tol_1d,
            cluster_tol: self.cluster_tol_numeric,
        }
    }

    /// Cuts for a 2D assembly on an `nt x ntheta` cell grid. Both bands
    /// track the `O(h^2)` discretization error.
    pub fn grid_2d_cuts(&self, nt: usize, ntheta: usize) -> CutTolerances {
        let s = Self::resolution_scale(nt, ntheta);
        CutTolerances {
            null_tol: self.null_tol_2d * s,
            cluster_tol: self.cluster_tol_2d * s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_resolution_reproduces_defaults() {
        let tol = ToleranceProfile::default();
        let cuts = tol.grid_2d_cuts(128, 128);
        assert_eq!(cuts.null_tol, 1e-3);
        assert_eq!(cuts.cluster_tol, 5e-3);
        let coarse = tol.grid_2d_cuts(64, 64);
        assert!((coarse.null_tol - 4e-3).abs() < 1e-15);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let tol: ToleranceProfile = serde_json::from_str(r#"{"null_tol_2d": 2e-3}"#).unwrap();
        assert_eq!(tol.null_tol_2d, 2e-3);
        assert_eq!(tol.ode_atol, 1e-12);
    }
}
