//! Symmetric banded matrices with an unpivoted `L D L^T` factorization.
//!
//! Storage keeps the lower band row by row: entry `(i, j)` with
//! `0 <= i - j <= bw` lives at `data[i * (bw + 1) + (i - j)]`.

use std::ops::Range;

use crate::error::{FbmsError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBanded {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i - j <= self.bw).then(|| i * (self.bw + 1) + (i - j))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Add `v` to the symmetric pair `(i, j)`, `(j, i)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the band; that is an assembly bug.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside bandwidth {}", self.bw));
        self.data[s] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            y[i] += row[0] * x[i];
            for (d, &a) in row.iter().enumerate().skip(1) {
                if d > i {
                    break;
                }
                if a != 0.0 {
                    y[i] += a * x[i - d];
                    y[i - d] += a * x[i];
                }
            }
        }
        y
    }

    /// `x^T A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// `self + s * other` for matrices of equal shape.
    pub fn add_scaled(&self, s: f64, other: &SymBanded) -> Result<SymBanded> {
        if self.n != other.n || self.bw != other.bw {
            return Err(FbmsError::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(SymBanded {
            n: self.n,
            bw: self.bw,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    /// Principal submatrix on a contiguous index range.
    pub fn principal_block(&self, r: Range<usize>) -> SymBanded {
        let m = r.len();
        let mut out = SymBanded::zeros(m, self.bw);
        for i in 0..m {
            for d in 0..=self.bw.min(i) {
                let v = self.data[(r.start + i) * (self.bw + 1) + d];
                out.data[i * (self.bw + 1) + d] = v;
            }
        }
        out
    }

    /// `max_i sum_j |a_ij|`.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.n];
        for i in 0..self.n {
            for d in 0..=self.bw.min(i) {
                let a = self.data[i * (self.bw + 1) + d].abs();
                rows[i] += a;
                if d > 0 {
                    rows[i - d] += a;
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// Nonzero lower-triangle entries `(i, j, a_ij)` with `i >= j`, in row
    /// order.
    pub fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for d in (0..=self.bw.min(i)).rev() {
                let v = self.data[i * (self.bw + 1) + d];
                if v != 0.0 {
                    out.push((i, i - d, v));
                }
            }
        }
        out
    }

    /// Unpivoted `L D L^T`. Fails on a pivot below `1e-14 * ||A||_inf`.
    pub fn ldl(&self) -> Result<LdlFactor> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut l = self.data.clone();
        let mut d = vec![0.0; n];
        let scale = self.norm_inf().max(f64::MIN_POSITIVE);
        let mut ld = vec![0.0; w];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            // ld[k - lo] = l_ik d_k for the finished part of row i.
            for j in lo..i {
                let jlo = j.saturating_sub(bw).max(lo);
                let mut s = l[i * w + (i - j)];
                for k in jlo..j {
                    s -= ld[k - lo] * l[j * w + (j - k)];
                }
                ld[j - lo] = s;
                l[i * w + (i - j)] = s / d[j];
            }
            let mut di = l[i * w];
            for k in lo..i {
                di -= ld[k - lo] * l[i * w + (i - k)];
            }
            if !di.is_finite() || di.abs() <= 1e-14 * scale {
                return Err(FbmsError::solver(format!(
                    "LDL^T pivot {di:.3e} at row {i} of {n} (||A||_inf = {scale:.3e}); matrix singular or needs pivoting"
                )));
            }
            d[i] = di;
            l[i * w] = 1.0;
        }
        Ok(LdlFactor { n, bw, l, d })
    }
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl LdlFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let w = self.bw + 1;
        let mut x = b.to_vec();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut s = x[i];
            for k in lo..i {
                s -= self.l[i * w + (i - k)] * x[k];
            }
            x[i] = s;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..self.n).rev() {
            let xi = x[i];
            let lo = i.saturating_sub(self.bw);
            for k in lo..i {
                x[k] -= self.l[i * w + (i - k)] * xi;
            }
        }
        x
    }

    /// Number of negative pivots; by Sylvester's law of inertia, the number
    /// of negative eigenvalues of the factored matrix.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, bw: usize, shift: f64, seed: u64) -> SymBanded {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = SymBanded::zeros(n, bw);
        for i in 0..n {
            for j in i.saturating_sub(bw)..i {
                a.add(i, j, rng.gen_range(-1.0..1.0));
            }
            a.add(i, i, shift + rng.gen_range(-1.0..1.0));
        }
        a
    }

    fn dense(a: &SymBanded) -> DMatrix<f64> {
        DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
    }

    #[test]
    fn solve_matches_dense() {
        let a = random_banded(40, 5, 12.0, 1);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let x = a.ldl().unwrap().solve(&b);
        let r = a.matvec(&x);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn inertia_counts_negative_eigenvalues() {
        let a = random_banded(30, 3, 0.3, 7);
        let ev = SymmetricEigen::new(dense(&a)).eigenvalues;
        let neg = ev.iter().filter(|&&v| v < 0.0).count();
        assert_eq!(a.ldl().unwrap().negative_pivots(), neg);
    }

    #[test]
    fn block_and_triplets() {
        let a = random_banded(10, 2, 5.0, 3);
        let b = a.principal_block(3..8);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(b.get(i, j), a.get(i + 3, j + 3));
            }
        }
        let t = a.lower_triplets();
        assert!(t.iter().all(|&(i, j, _)| i >= j && i - j <= 2));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = SymBanded::zeros(3, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(2, 2, 1.0);
        assert!(matches!(a.ldl(), Err(FbmsError::Solver(_))));
    }

    proptest! {
        #[test]
        fn matvec_is_symmetric(seed in 0u64..500, n in 4usize..30, bw in 1usize..4) {
            let a = random_banded(n, bw, 0.0, seed);
            let x: Vec<f64> = (0..n).map(|i| ((i * 13 + 1) as f64).cos()).collect();
            let y: Vec<f64> = (0..n).map(|i| ((i * 7 + 2) as f64).sin()).collect();
            prop_assert!((a.form(&x, &y) - a.form(&y, &x)).abs() < 1e-10);
        }
    }
}
