//! Functions sampled on a uniform 1D grid, with second-order differences.

use crate::error::{FbmsError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    pub start: f64,
    pub end: f64,
    /// Number of sample points, endpoints included.
    pub points: usize,
}

impl UniformGrid {
    pub fn new(start: f64, end: f64, points: usize) -> Self {
        UniformGrid { start, end, points }
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.end
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.node(i))
    }

    /// The grid with every interval halved.
    pub fn refined(&self) -> Self {
        UniformGrid::new(self.start, self.end, 2 * self.points - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        SampledFunction { grid, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |f|` over nodes at least `margin` points away from either end.
    pub fn interior_max_abs(&self, margin: usize) -> f64 {
        let n = self.values.len();
        if n <= 2 * margin {
            return 0.0;
        }
        self.values[margin..n - margin]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise `self + scale * other`.
    pub fn axpy(&self, scale: f64, other: &SampledFunction) -> SampledFunction {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        SampledFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Pointwise `w(t) * self + c * self`.
    pub fn multiply_add(&self, w: impl Fn(f64) -> f64, c: f64) -> SampledFunction {
        let values = self
            .grid
            .nodes()
            .zip(&self.values)
            .map(|(t, v)| (w(t) + c) * v)
            .collect();
        SampledFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    fn check(&self, min_points: usize) -> Result<()> {
        if self.values.len() != self.grid.points {
            return Err(FbmsError::DimensionMismatch {
                expected: self.grid.points,
                got: self.values.len(),
            });
        }
        if self.grid.points < min_points {
            return Err(FbmsError::validation(format!(
                "grid too coarse: {} points, need at least {min_points}",
                self.grid.points
            )));
        }
        Ok(())
    }

    /// Second-order first derivative: central in the interior, one-sided
    /// three-point at the ends.
    pub fn derivative(&self) -> Result<SampledFunction> {
        self.check(3)?;
        let h = self.grid.step();
        let v = &self.values;
        let n = v.len();
        let mut d = vec![0.0; n];
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        Ok(SampledFunction {
            grid: self.grid.clone(),
            values: d,
        })
    }

    /// Second-order second derivative: central in the interior, one-sided
    /// four-point at the ends.
    pub fn second_derivative(&self) -> Result<SampledFunction> {
        self.check(4)?;
        let h2 = self.grid.step().powi(2);
        let v = &self.values;
        let n = v.len();
        let mut d = vec![0.0; n];
        d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
        d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        }
        Ok(SampledFunction {
            grid: self.grid.clone(),
            values: d,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differences_are_exact_on_quadratics() {
        let g = UniformGrid::new(-1.0, 2.0, 11);
        let f = SampledFunction::from_fn(g, |t| 3.0 * t * t - t + 2.0);
        let d = f.derivative().unwrap();
        let dd = f.second_derivative().unwrap();
        for (t, (a, b)) in f.grid.nodes().zip(d.values.iter().zip(&dd.values)) {
            assert!((a - (6.0 * t - 1.0)).abs() < 1e-12);
            assert!((b - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn refined_grid_keeps_old_nodes() {
        let g = UniformGrid::new(0.0, 1.0, 5);
        let r = g.refined();
        assert_eq!(r.points, 9);
        for i in 0..5 {
            assert_eq!(g.node(i), r.node(2 * i));
        }
    }
}
