//! Symmetric tridiagonal matrices: Sturm-sequence bisection, inverse
//! iteration and the Thomas solve.

use crate::error::{FbmsError, Result};

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(FbmsError::DimensionMismatch {
                expected: diag.len().saturating_sub(1),
                got: off.len(),
            });
        }
        Ok(SymTridiagonal { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let denom = if q == 0.0 {
                f64::EPSILON * self.off[i - 1].abs().max(1e-300)
            } else {
                q
            };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues, ascending, by bisection.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.dim());
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1e-300);
        (0..k)
            .map(|j| {
                // Smallest x with count_below(x) > j.
                let (mut a, mut b) = (lo - 1e-12 * scale, hi + 1e-12 * scale);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b || b - a <= 4.0 * f64::EPSILON * scale {
                        break;
                    }
                    if self.count_below(m) > j {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }

    /// Solve `(T - shift I) x = rhs` with the Thomas algorithm.
    pub fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(FbmsError::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let tiny = 1e-300;
        let mut piv = self.diag[0] - shift;
        if piv.abs() < tiny {
            piv = tiny;
        }
        if n > 1 {
            c[0] = self.off[0] / piv;
        }
        d[0] = rhs[0] / piv;
        for i in 1..n {
            let mut p = self.diag[i] - shift - self.off[i - 1] * c[i - 1];
            if p.abs() < tiny {
                p = tiny;
            }
            if i + 1 < n {
                c[i] = self.off[i] / p;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / p;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Unit eigenvector for an eigenvalue estimate, by inverse iteration.
    pub fn eigenvector(&self, eigenvalue: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let scale = self.gershgorin().1.abs().max(1.0);
        let shift = eigenvalue + 1e-10 * scale;
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.01 * ((i * 7919) % 13) as f64)
            .collect();
        for _ in 0..4 {
            x = self.solve_shifted(shift, &x)?;
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(FbmsError::solver("inverse iteration broke down"));
            }
            x.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(x)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}
