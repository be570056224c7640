//! JSON chart descriptors.
//!
//! ```json
//! {"kind": "catenoid"}
//! {"kind": "catenoid", "half_height": 1.2}
//! {"kind": "disk"}
//! {"kind": "custom", "name": "s", "t_range": [-1, 1], "nt": 33, "ntheta": 32,
//!  "positions": [x0, y0, z0, x1, ...]}
//! ```
//!
//! Custom positions are sampled at `t_i = t_min + i (t_max - t_min) / (nt - 1)`
//! and `theta_j = 2 pi j / ntheta`, row-major with `t` as the row index and
//! three floats per sample. The chart interpolates them by a trigonometric
//! polynomial in `theta` whose coefficients are not-a-knot cubic splines in
//! `t`; derivatives are those of the interpolant.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FbmsError, Result};
use crate::geometry::{
    make_catenoid, make_critical_catenoid, make_custom_chart, make_equatorial_disk, CatenoidParams,
    ChartDerivatives, SurfaceChart, Vec3,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartDescriptor {
    Catenoid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        half_height: Option<f64>,
    },
    Disk,
    Custom {
        #[serde(default = "custom_name")]
        name: String,
        t_range: [f64; 2],
        nt: usize,
        ntheta: usize,
        positions: Vec<f64>,
    },
}

fn custom_name() -> String {
    "custom".into()
}

impl ChartDescriptor {
    /// Parse a descriptor; bare `catenoid` and `disk` are accepted as
    /// shorthands.
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "catenoid" => return Ok(ChartDescriptor::Catenoid { half_height: None }),
            "disk" => return Ok(ChartDescriptor::Disk),
            _ => {}
        }
        serde_json::from_str(text)
            .map_err(|e| FbmsError::validation(format!("bad chart descriptor: {e}")))
    }

    pub fn is_catenoid(&self) -> bool {
        matches!(self, ChartDescriptor::Catenoid { .. })
    }

    pub fn build(&self) -> Result<SurfaceChart> {
        match self {
            ChartDescriptor::Catenoid { half_height: None } => Ok(make_critical_catenoid()),
            ChartDescriptor::Catenoid {
                half_height: Some(t),
            } => {
                if !(t.is_finite() && *t > 0.0) {
                    return Err(FbmsError::validation(format!(
                        "catenoid half_height must be positive, got {t}"
                    )));
                }
                Ok(make_catenoid(CatenoidParams::with_half_height(*t)))
            }
            ChartDescriptor::Disk => Ok(make_equatorial_disk()),
            ChartDescriptor::Custom {
                name,
                t_range,
                nt,
                ntheta,
                positions,
            } => {
                let table = Arc::new(TabulatedChart::new(*t_range, *nt, *ntheta, positions)?);
                let p = table.clone();
                make_custom_chart(
                    name.clone(),
                    (t_range[0], t_range[1]),
                    Arc::new(move |t, th| p.eval(t, th).x),
                    Some(Arc::new(move |t, th| table.eval(t, th))),
                )
            }
        }
    }
}

/// Cubic spline through uniformly spaced values with not-a-knot ends,
/// stored as the nodal values and second derivatives.
#[derive(Debug, Clone)]
struct Spline {
    t0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn new(t0: f64, h: f64, y: Vec<f64>) -> Self {
        let n = y.len();
        let mut m = vec![0.0; n];
        if n >= 4 {
            // Interior equations m_{i-1} + 4 m_i + m_{i+1} = 6 d_i, with the
            // not-a-knot conditions m_0 = 2 m_1 - m_2 and
            // m_{n-1} = 2 m_{n-2} - m_{n-3} eliminated.
            let k = n - 2;
            let d: Vec<f64> = (1..n - 1)
                .map(|i| 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h))
                .collect();
            let mut diag = vec![4.0; k];
            let mut lower = vec![1.0; k];
            let mut upper = vec![1.0; k];
            diag[0] = 6.0;
            upper[0] = 0.0;
            diag[k - 1] = 6.0;
            lower[k - 1] = 0.0;
            // Thomas algorithm.
            let mut c = vec![0.0; k];
            let mut r = vec![0.0; k];
            c[0] = upper[0] / diag[0];
            r[0] = d[0] / diag[0];
            for i in 1..k {
                let den = diag[i] - lower[i] * c[i - 1];
                c[i] = upper[i] / den;
                r[i] = (d[i] - lower[i] * r[i - 1]) / den;
            }
            for i in (0..k).rev() {
                m[i + 1] = r[i] - if i + 1 < k { c[i] * m[i + 2] } else { 0.0 };
            }
            m[0] = 2.0 * m[1] - m[2];
            m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
        }
        Spline { t0, h, y, m }
    }

    /// Value, first and second derivative.
    fn eval(&self, t: f64) -> [f64; 3] {
        let n = self.y.len();
        let s = ((t - self.t0) / self.h).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let (h, a) = (self.h, s - i as f64);
        let b = 1.0 - a;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let v = b * y0 + a * y1 + h * h / 6.0 * ((b * b * b - b) * m0 + (a * a * a - a) * m1);
        let d1 = (y1 - y0) / h + h / 6.0 * ((1.0 - 3.0 * b * b) * m0 + (3.0 * a * a - 1.0) * m1);
        let d2 = b * m0 + a * m1;
        [v, d1, d2]
    }
}

/// Tabulated chart interpolant.
#[derive(Debug, Clone)]
pub struct TabulatedChart {
    ntheta: usize,
    /// Splines of the Fourier coefficients, indexed `[coord][k]`:
    /// `k = 0` constant, `2q - 1` the cosine and `2q` the sine of mode `q`.
    coeffs: Vec<Vec<Spline>>,
}

impl TabulatedChart {
    pub fn new(t_range: [f64; 2], nt: usize, ntheta: usize, positions: &[f64]) -> Result<Self> {
        if !(t_range[1] > t_range[0]) {
            return Err(FbmsError::validation(
                "custom chart needs t_range[0] < t_range[1]",
            ));
        }
        if nt < 4 || ntheta < 4 || ntheta % 2 != 0 {
            return Err(FbmsError::validation(format!(
                "custom chart needs nt >= 4 and an even ntheta >= 4, got {nt} x {ntheta}"
            )));
        }
        if positions.len() != 3 * nt * ntheta {
            return Err(FbmsError::DimensionMismatch {
                expected: 3 * nt * ntheta,
                got: positions.len(),
            });
        }
        if positions.iter().any(|v| !v.is_finite()) {
            return Err(FbmsError::validation(
                "custom chart positions must be finite",
            ));
        }
        let h = (t_range[1] - t_range[0]) / (nt - 1) as f64;
        let half = ntheta / 2;
        let ncoef = ntheta;
        let mut coeffs = Vec::with_capacity(3);
        for coord in 0..3 {
            let mut per_k = vec![vec![0.0; nt]; ncoef];
            for i in 0..nt {
                let row = |j: usize| positions[3 * (i * ntheta + j) + coord];
                for q in 0..=half {
                    let (mut c, mut s) = (0.0, 0.0);
                    for j in 0..ntheta {
                        let ang = 2.0 * PI * (q * j) as f64 / ntheta as f64;
                        c += row(j) * ang.cos();
                        s += row(j) * ang.sin();
                    }
                    let w = if q == 0 || q == half { 1.0 } else { 2.0 } / ntheta as f64;
                    if q == 0 {
                        per_k[0][i] = w * c;
                    } else if q == half {
                        per_k[2 * q - 1][i] = w * c;
                    } else {
                        per_k[2 * q - 1][i] = w * c;
                        per_k[2 * q][i] = w * s;
                    }
                }
            }
            coeffs.push(
                per_k
                    .into_iter()
                    .map(|y| Spline::new(t_range[0], h, y))
                    .collect(),
            );
        }
        Ok(TabulatedChart { ntheta, coeffs })
    }

    pub fn eval(&self, t: f64, th: f64) -> ChartDerivatives {
        let half = self.ntheta / 2;
        let mut out = [[0.0; 6]; 3];
        for (coord, splines) in self.coeffs.iter().enumerate() {
            let acc = &mut out[coord];
            let [v, d1, d2] = splines[0].eval(t);
            acc[0] += v;
            acc[1] += d1;
            acc[3] += d2;
            for q in 1..=half {
                let qf = q as f64;
                let (s, c) = (qf * th).sin_cos();
                let mut terms = vec![(splines[2 * q - 1].eval(t), c, -qf * s)];
                if q < half {
                    terms.push((splines[2 * q].eval(t), s, qf * c));
                }
                for ([v, d1, d2], basis, dbasis) in terms {
                    let ddbasis = -qf * qf * basis;
                    acc[0] += v * basis;
                    acc[1] += d1 * basis;
                    acc[2] += v * dbasis;
                    acc[3] += d2 * basis;
                    acc[4] += d1 * dbasis;
                    acc[5] += v * ddbasis;
                }
            }
        }
        let vec = |k: usize| Vec3::new(out[0][k], out[1][k], out[2][k]);
        ChartDerivatives {
            x: vec(0),
            x_t: vec(1),
            x_th: vec(2),
            x_tt: vec(3),
            x_tth: vec(4),
            x_thth: vec(5),
        }
    }
}

/// Sample a chart on the descriptor grid, for building custom descriptors
/// from known surfaces.
pub fn tabulate(chart: &SurfaceChart, nt: usize, ntheta: usize) -> ChartDescriptor {
    let h = (chart.t_max - chart.t_min) / (nt - 1) as f64;
    let mut positions = Vec::with_capacity(3 * nt * ntheta);
    for i in 0..nt {
        for j in 0..ntheta {
            let x = chart.position(
                chart.t_min + i as f64 * h,
                2.0 * PI * j as f64 / ntheta as f64,
            );
            positions.extend([x.x, x.y, x.z]);
        }
    }
    ChartDescriptor::Custom {
        name: format!("tabulated-{}", chart.name),
        t_range: [chart.t_min, chart.t_max],
        nt,
        ntheta,
        positions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_descriptors_parse() {
        assert!(ChartDescriptor::parse("catenoid").unwrap().is_catenoid());
        let d = ChartDescriptor::parse(r#"{"kind": "disk"}"#).unwrap();
        assert_eq!(d, ChartDescriptor::Disk);
        let c = ChartDescriptor::parse(r#"{"kind": "catenoid", "half_height": 1.0}"#).unwrap();
        assert!(c.build().unwrap().catenoid_params().is_some());
        assert!(ChartDescriptor::parse(r#"{"kind": "torus"}"#).is_err());
        assert!(
            ChartDescriptor::parse(r#"{"kind": "catenoid", "half_height": -1}"#)
                .unwrap()
                .build()
                .is_err()
        );
    }

    #[test]
    fn spline_reproduces_cubics() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        let s = Spline::new(
            -1.0,
            0.25,
            (0..9).map(|i| f(-1.0 + 0.25 * i as f64)).collect(),
        );
        for t in [-0.9, -0.13, 0.4, 0.99] {
            let [v, d1, d2] = s.eval(t);
            assert!((v - f(t)).abs() < 1e-12);
            assert!((d1 - (-2.0 + 1.5 * t * t)).abs() < 1e-11);
            assert!((d2 - 3.0 * t).abs() < 1e-10);
        }
    }

    #[test]
    fn tabulated_catenoid_matches_the_analytic_chart() {
        let exact = make_critical_catenoid();
        let table = tabulate(&exact, 65, 16).build().unwrap();
        assert!(table.has_analytic_derivatives());
        for (t, th) in [(-1.1, 0.3), (0.05, 2.0), (0.9, 5.5)] {
            let a = exact.point_geometry(t, th).unwrap();
            let b = table.point_geometry(t, th).unwrap();
            assert!((a.x - b.x).norm() < 1e-6);
            assert!((a.nu - b.nu).norm() < 1e-5);
            assert!((a.h_norm_sq - b.h_norm_sq).abs() < 1e-3 * a.h_norm_sq);
        }
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let bad = ChartDescriptor::Custom {
            name: "x".into(),
            t_range: [0.0, 1.0],
            nt: 8,
            ntheta: 8,
            positions: vec![0.0; 10],
        };
        assert!(matches!(
            bad.build(),
            Err(FbmsError::DimensionMismatch { .. })
        ));
    }
}
