//! Bilinear finite elements for the forms `Q` and `S` on a chart's tensor
//! grid.
//!
//! The parameter rectangle `[t_min, t_max] x [0, 2pi)` is split into
//! `nt x ntheta` cells and each cell carries the four bilinear shape
//! functions. Integrals use the chart metric at 2x2 Gauss points, so for a
//! conformal chart `sqrt(g) g^ij` is the identity and the stiffness is the
//! flat one. Degrees of freedom run row by row in `t`; inside a row the
//! angular nodes are interleaved (0, N-1, 1, N-2, ...) so that the periodic
//! wrap does not widen the band beyond `ntheta + 2`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FbmsError, Result};
use crate::geometry::{BoundaryComponent, ChartKind, PointGeometry, SurfaceChart};
use crate::linalg::banded::SymBanded;
use crate::tolerance::ToleranceProfile;

/// Smallest admissible cell count in either direction.
pub const MIN_CELLS: usize = 16;

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub nt: usize,
    pub ntheta: usize,
}

impl Resolution {
    pub fn new(nt: usize, ntheta: usize) -> Self {
        Resolution { nt, ntheta }
    }

    pub fn square(n: usize) -> Self {
        Resolution { nt: n, ntheta: n }
    }

    pub fn doubled(&self) -> Self {
        Resolution::new(2 * self.nt, 2 * self.ntheta)
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.nt, self.ntheta)
    }
}

/// Node layout and degree-of-freedom numbering.
#[derive(Debug, Clone)]
pub struct Grid {
    pub resolution: Resolution,
    pub t_nodes: Vec<f64>,
    pub theta_nodes: Vec<f64>,
    /// Row 0 sits on an excised polar center and is a single dof.
    pub merged_center: bool,
    row_start: Vec<usize>,
    n_dofs: usize,
    /// Boundary rows in increasing row order.
    pub boundary_rows: Vec<(BoundaryComponent, usize)>,
    interior: Range<usize>,
}

impl Grid {
    pub fn new(
        chart: &SurfaceChart,
        res: Resolution,
        theta_offset: f64,
        tol: &ToleranceProfile,
    ) -> Result<Self> {
        if res.nt < MIN_CELLS || res.ntheta < MIN_CELLS {
            return Err(FbmsError::validation(format!(
                "resolution {res} below the minimum {MIN_CELLS}x{MIN_CELLS}"
            )));
        }
        if !chart.periodic_theta {
            return Err(FbmsError::validation(
                "the assembler requires a periodic angular coordinate",
            ));
        }
        let merged_center = chart.center_singularity;
        if merged_center && chart.boundary.contains(&BoundaryComponent::Lower) {
            return Err(FbmsError::validation(
                "a polar center cannot also be a boundary curve",
            ));
        }
        let t0 = if merged_center {
            chart.t_min + tol.disk_excision
        } else {
            chart.t_min
        };
        let ht = (chart.t_max - t0) / res.nt as f64;
        let t_nodes = (0..=res.nt)
            .map(|i| {
                if i == res.nt {
                    chart.t_max
                } else {
                    t0 + i as f64 * ht
                }
            })
            .collect();
        let hth = TAU / res.ntheta as f64;
        let theta_nodes = (0..res.ntheta)
            .map(|j| theta_offset + j as f64 * hth)
            .collect();
        let mut row_start = Vec::with_capacity(res.nt + 2);
        let mut next = 0;
        for row in 0..=res.nt {
            row_start.push(next);
            next += if row == 0 && merged_center {
                1
            } else {
                res.ntheta
            };
        }
        let mut boundary_rows: Vec<(BoundaryComponent, usize)> = chart
            .boundary
            .iter()
            .map(|&c| {
                (
                    c,
                    match c {
                        BoundaryComponent::Lower => 0,
                        BoundaryComponent::Upper => res.nt,
                    },
                )
            })
            .collect();
        boundary_rows.sort_by_key(|&(_, r)| r);
        boundary_rows.dedup();
        let lo = if boundary_rows.iter().any(|&(_, r)| r == 0) {
            row_start[1]
        } else {
            0
        };
        let hi = if boundary_rows.iter().any(|&(_, r)| r == res.nt) {
            row_start[res.nt]
        } else {
            next
        };
        Ok(Grid {
            resolution: res,
            t_nodes,
            theta_nodes,
            merged_center,
            row_start,
            n_dofs: next,
            boundary_rows,
            interior: lo..hi,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn ht(&self) -> f64 {
        self.t_nodes[1] - self.t_nodes[0]
    }

    pub fn htheta(&self) -> f64 {
        TAU / self.resolution.ntheta as f64
    }

    pub fn bandwidth(&self) -> usize {
        self.resolution.ntheta + 2
    }

    /// Position of angular node `j` inside its row.
    fn slot(&self, j: usize) -> usize {
        let n = self.resolution.ntheta;
        if 2 * j < n {
            2 * j
        } else {
            2 * (n - 1 - j) + 1
        }
    }

    pub fn dof(&self, row: usize, j: usize) -> usize {
        if row == 0 && self.merged_center {
            0
        } else {
            self.row_start[row] + self.slot(j % self.resolution.ntheta)
        }
    }

    /// Contiguous range of interior dofs.
    pub fn interior(&self) -> Range<usize> {
        self.interior.clone()
    }

    /// Boundary dofs ordered by boundary row, then angular index.
    pub fn boundary_dofs(&self) -> Vec<usize> {
        self.boundary_nodes().map(|(_, _, d)| d).collect()
    }

    /// `(component, j, dof)` for every boundary node.
    pub fn boundary_nodes(&self) -> impl Iterator<Item = (BoundaryComponent, usize, usize)> + '_ {
        self.boundary_rows.iter().flat_map(move |&(c, row)| {
            (0..self.resolution.ntheta).map(move |j| (c, j, self.dof(row, j)))
        })
    }

    /// Parameter coordinates of every dof; the merged center reports the
    /// excision radius and angle 0.
    pub fn dof_coords(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); self.n_dofs];
        for (row, &t) in self.t_nodes.iter().enumerate() {
            for (j, &th) in self.theta_nodes.iter().enumerate() {
                let d = self.dof(row, j);
                if !(self.merged_center && row == 0 && j > 0) {
                    out[d] = (t, th);
                }
            }
        }
        out
    }

    /// Sample `f(t, theta)` at the dofs.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.dof_coords()
            .into_iter()
            .map(|(t, th)| f(t, th))
            .collect()
    }

    /// Values of a dof vector on grid row `row`, angular order.
    pub fn row_values(&self, v: &[f64], row: usize) -> Vec<f64> {
        (0..self.resolution.ntheta)
            .map(|j| v[self.dof(row, j)])
            .collect()
    }

    fn cell_dofs(&self, i: usize, j: usize) -> [usize; 4] {
        [
            self.dof(i, j),
            self.dof(i, j + 1),
            self.dof(i + 1, j),
            self.dof(i + 1, j + 1),
        ]
    }
}

/// A scalar coefficient evaluated at quadrature points.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    /// `|h|^2` of the chart (the potential `Rc(nu,nu) + |h|^2` in flat space).
    SecondFormSquared,
    Scaled(f64, Box<ScalarField>),
    /// Values at the dofs, interpolated by the shape functions.
    Nodal(Arc<Vec<f64>>),
    Function(Arc<dyn Fn(f64, f64, &PointGeometry) -> f64 + Send + Sync>),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::SecondFormSquared => write!(f, "SecondFormSquared"),
            ScalarField::Scaled(s, inner) => write!(f, "Scaled({s}, {inner:?})"),
            ScalarField::Nodal(v) => write!(f, "Nodal({} values)", v.len()),
            ScalarField::Function(_) => write!(f, "Function"),
        }
    }
}

impl ScalarField {
    fn eval(&self, t: f64, th: f64, pg: &PointGeometry, dofs: &[usize], shape: &[f64]) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::SecondFormSquared => pg.h_norm_sq,
            ScalarField::Scaled(s, inner) => s * inner.eval(t, th, pg, dofs, shape),
            ScalarField::Nodal(v) => dofs.iter().zip(shape).map(|(&d, &n)| v[d] * n).sum(),
            ScalarField::Function(f) => f(t, th, pg),
        }
    }

    fn check(&self, n_dofs: usize) -> Result<()> {
        match self {
            ScalarField::Nodal(v) if v.len() != n_dofs => Err(FbmsError::DimensionMismatch {
                expected: n_dofs,
                got: v.len(),
            }),
            ScalarField::Scaled(_, inner) => inner.check(n_dofs),
            _ => Ok(()),
        }
    }
}

/// The weight `phi > 0`, the potential `m` and the boundary constant
/// `alpha` of the forms `Q` and `S`.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub phi: ScalarField,
    pub m: ScalarField,
    pub alpha: f64,
}

impl CoefficientField {
    /// `phi = 1`, `m = |h|^2`, `alpha = 1`: the index form of a free
    /// boundary minimal surface in the unit ball.
    pub fn ball() -> Self {
        CoefficientField {
            phi: ScalarField::Constant(1.0),
            m: ScalarField::SecondFormSquared,
            alpha: 1.0,
        }
    }

    /// `phi = 1`, `m = 0`: the Laplacian.
    pub fn laplace() -> Self {
        CoefficientField {
            phi: ScalarField::Constant(1.0),
            m: ScalarField::Constant(0.0),
            alpha: 0.0,
        }
    }

    pub fn with_potential_scale(mut self, s: f64) -> Self {
        self.m = ScalarField::Scaled(s, Box::new(self.m));
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub gauss_points_per_axis: usize,
    pub excision_radius: Option<f64>,
    /// Largest positive part of `m` over the quadrature points.
    pub max_potential: f64,
    pub min_phi: f64,
    pub theta_offset: f64,
}

/// Assembled matrices over all dofs: stiffness `K = int phi grad u grad v`,
/// potential `V = int m u v`, mass `M = int u v` and boundary mass
/// `B = int_bdry phi u v`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub chart: SurfaceChart,
    pub grid: Grid,
    pub coeffs: CoefficientField,
    pub k: SymBanded,
    pub v: SymBanded,
    pub m: SymBanded,
    pub b: SymBanded,
    pub quadrature: QuadratureInfo,
    pub notes: Vec<String>,
}

struct CellBlock {
    dofs: [usize; 4],
    k: [[f64; 4]; 4],
    v: [[f64; 4]; 4],
    m: [[f64; 4]; 4],
    max_m: f64,
    min_phi: f64,
}

fn scatter(target: &mut SymBanded, dofs: &[usize], local: &[[f64; 4]; 4], n: usize) {
    for a in 0..n {
        for b in a..n {
            let (i, j) = (dofs[a], dofs[b]);
            let v = local[a][b];
            if a == b {
                target.add(i, i, v);
            } else if i == j {
                target.add(i, i, 2.0 * v);
            } else {
                target.add(i, j, v);
            }
        }
    }
}

fn geometry_at(
    chart: &SurfaceChart,
    t: f64,
    th: f64,
    cell: (usize, usize),
    tol: &ToleranceProfile,
) -> Result<PointGeometry> {
    chart.point_geometry_with(t, th, tol).map_err(|e| match e {
        FbmsError::SingularChart { det, .. } => FbmsError::DegenerateCell {
            cell_t: cell.0,
            cell_theta: cell.1,
            det,
        },
        other => other,
    })
}

fn shape(xi: f64, eta: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    (
        [
            (1.0 - xi) * (1.0 - eta),
            (1.0 - xi) * eta,
            xi * (1.0 - eta),
            xi * eta,
        ],
        [-(1.0 - eta), -eta, 1.0 - eta, eta],
        [-(1.0 - xi), 1.0 - xi, -xi, xi],
    )
}

/// `sqrt(g) g^-1`, exactly the identity for conformal points.
fn flux_tensor(pg: &PointGeometry) -> Matrix2<f64> {
    if pg.conformal_factor.is_some() {
        Matrix2::identity()
    } else {
        pg.inverse_metric() * pg.area_element()
    }
}

fn assemble_cell(
    chart: &SurfaceChart,
    grid: &Grid,
    coeffs: &CoefficientField,
    i: usize,
    j: usize,
    tol: &ToleranceProfile,
) -> Result<CellBlock> {
    let dofs = grid.cell_dofs(i, j);
    let (ht, hth) = (grid.ht(), grid.htheta());
    let (t0, th0) = (grid.t_nodes[i], grid.theta_nodes[j]);
    let mut blk = CellBlock {
        dofs,
        k: [[0.0; 4]; 4],
        v: [[0.0; 4]; 4],
        m: [[0.0; 4]; 4],
        max_m: 0.0,
        min_phi: f64::INFINITY,
    };
    for &xi in &GAUSS {
        for &eta in &GAUSS {
            let (t, th) = (t0 + xi * ht, th0 + eta * hth);
            let pg = geometry_at(chart, t, th, (i, j), tol)?;
            let (n, dxi, deta) = shape(xi, eta);
            let phi = coeffs.phi.eval(t, th, &pg, &dofs, &n);
            if !(phi > 0.0) {
                return Err(FbmsError::validation(format!(
                    "phi = {phi:.3e} is not positive at (t, theta) = ({t:.6}, {th:.6})"
                )));
            }
            let mval = coeffs.m.eval(t, th, &pg, &dofs, &n);
            blk.max_m = blk.max_m.max(mval);
            blk.min_phi = blk.min_phi.min(phi);
            let w = 0.25 * ht * hth;
            let sg = pg.area_element();
            let flux = flux_tensor(&pg);
            let grads: Vec<[f64; 2]> = (0..4).map(|a| [dxi[a] / ht, deta[a] / hth]).collect();
            for a in 0..4 {
                for b in a..4 {
                    let ga = &grads[a];
                    let gb = &grads[b];
                    let kab = ga[0] * (flux[(0, 0)] * gb[0] + flux[(0, 1)] * gb[1])
                        + ga[1] * (flux[(1, 0)] * gb[0] + flux[(1, 1)] * gb[1]);
                    blk.k[a][b] += w * phi * kab;
                    blk.v[a][b] += w * sg * mval * n[a] * n[b];
                    blk.m[a][b] += w * sg * n[a] * n[b];
                }
            }
        }
    }
    Ok(blk)
}

/// Assemble the four matrices on `chart` at `res`.
pub fn assemble(
    chart: &SurfaceChart,
    coeffs: &CoefficientField,
    res: Resolution,
    tol: &ToleranceProfile,
) -> Result<DiscreteOperator> {
    assemble_with_offset(chart, coeffs, res, 0.0, tol)
}

/// As [`assemble`], with the angular grid starting at `theta_offset`.
pub fn assemble_with_offset(
    chart: &SurfaceChart,
    coeffs: &CoefficientField,
    res: Resolution,
    theta_offset: f64,
    tol: &ToleranceProfile,
) -> Result<DiscreteOperator> {
    let grid = Grid::new(chart, res, theta_offset, tol)?;
    coeffs.phi.check(grid.n_dofs())?;
    coeffs.m.check(grid.n_dofs())?;
    let cells: Vec<(usize, usize)> = (0..res.nt)
        .flat_map(|i| (0..res.ntheta).map(move |j| (i, j)))
        .collect();
    let blocks: Vec<CellBlock> = cells
        .par_iter()
        .map(|&(i, j)| assemble_cell(chart, &grid, coeffs, i, j, tol))
        .collect::<Result<_>>()?;
    let (n, bw) = (grid.n_dofs(), grid.bandwidth());
    let mut k = SymBanded::zeros(n, bw);
    let mut v = SymBanded::zeros(n, bw);
    let mut m = SymBanded::zeros(n, bw);
    let mut max_m: f64 = 0.0;
    let mut min_phi = f64::INFINITY;
    for blk in &blocks {
        scatter(&mut k, &blk.dofs, &blk.k, 4);
        scatter(&mut v, &blk.dofs, &blk.v, 4);
        scatter(&mut m, &blk.dofs, &blk.m, 4);
        max_m = max_m.max(blk.max_m);
        min_phi = min_phi.min(blk.min_phi);
    }
    let b = boundary_mass(chart, &grid, coeffs, tol)?;
    let mut notes = Vec::new();
    if grid.merged_center {
        notes.push(format!(
            "polar center excised at radius {:.1e}; inner ring merged into one dof (natural condition for n = 0, pinned for n >= 1)",
            tol.disk_excision
        ));
    }
    Ok(DiscreteOperator {
        chart: chart.clone(),
        grid,
        coeffs: coeffs.clone(),
        k,
        v,
        m,
        b,
        quadrature: QuadratureInfo {
            gauss_points_per_axis: 2,
            excision_radius: chart.center_singularity.then_some(tol.disk_excision),
            max_potential: max_m,
            min_phi,
            theta_offset,
        },
        notes,
    })
}

fn boundary_mass(
    chart: &SurfaceChart,
    grid: &Grid,
    coeffs: &CoefficientField,
    tol: &ToleranceProfile,
) -> Result<SymBanded> {
    let mut b = SymBanded::zeros(grid.n_dofs(), grid.bandwidth());
    let hth = grid.htheta();
    for &(_, row) in &grid.boundary_rows {
        let t = grid.t_nodes[row];
        for j in 0..grid.resolution.ntheta {
            let dofs = [grid.dof(row, j), grid.dof(row, j + 1)];
            let mut local = [[0.0; 4]; 4];
            for &eta in &GAUSS {
                let th = grid.theta_nodes[j] + eta * hth;
                let pg = geometry_at(chart, t, th, (row.min(grid.resolution.nt - 1), j), tol)?;
                let n = [1.0 - eta, eta];
                let phi = coeffs.phi.eval(t, th, &pg, &dofs, &n);
                let ds = 0.5 * hth * pg.derivatives.x_th.norm();
                for a in 0..2 {
                    for c in 0..2 {
                        local[a][c] += ds * phi * n[a] * n[c];
                    }
                }
            }
            scatter(&mut b, &dofs, &local, 2);
        }
    }
    Ok(b)
}

impl DiscreteOperator {
    pub fn n_dofs(&self) -> usize {
        self.grid.n_dofs()
    }

    pub fn alpha(&self) -> f64 {
        self.coeffs.alpha
    }

    /// `K - V`, the matrix of `Q`.
    pub fn q_matrix(&self) -> SymBanded {
        self.k.add_scaled(-1.0, &self.v).expect("same layout")
    }

    /// `K - V - alpha B`, the matrix of `S`.
    pub fn s_matrix(&self) -> SymBanded {
        self.q_matrix()
            .add_scaled(-self.alpha(), &self.b)
            .expect("same layout")
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_dofs() {
            return Err(FbmsError::DimensionMismatch {
                expected: self.n_dofs(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// `u^T (K - V - alpha B) v`.
    pub fn bilinear_s(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        self.check_len(v)?;
        Ok(self.k.form(u, v) - self.v.form(u, v) - self.alpha() * self.b.form(u, v))
    }

    pub fn bilinear_q(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        self.check_len(v)?;
        Ok(self.k.form(u, v) - self.v.form(u, v))
    }

    /// `S(u, v)` by direct quadrature of the integrand of the interpolated
    /// functions, bypassing the matrices.
    pub fn direct_quadrature_s(&self, u: &[f64], v: &[f64], tol: &ToleranceProfile) -> Result<f64> {
        self.check_len(u)?;
        self.check_len(v)?;
        let grid = &self.grid;
        let (ht, hth) = (grid.ht(), grid.htheta());
        let res = grid.resolution;
        let cells: Vec<(usize, usize)> = (0..res.nt)
            .flat_map(|i| (0..res.ntheta).map(move |j| (i, j)))
            .collect();
        let parts: Vec<f64> = cells
            .par_iter()
            .map(|&(i, j)| -> Result<f64> {
                let dofs = grid.cell_dofs(i, j);
                let mut acc = 0.0;
                for &xi in &GAUSS {
                    for &eta in &GAUSS {
                        let (t, th) = (grid.t_nodes[i] + xi * ht, grid.theta_nodes[j] + eta * hth);
                        let pg = geometry_at(&self.chart, t, th, (i, j), tol)?;
                        let (n, dxi, deta) = shape(xi, eta);
                        let interp = |f: &[f64]| -> (f64, [f64; 2]) {
                            let mut val = 0.0;
                            let mut grad = [0.0; 2];
                            for a in 0..4 {
                                val += f[dofs[a]] * n[a];
                                grad[0] += f[dofs[a]] * dxi[a] / ht;
                                grad[1] += f[dofs[a]] * deta[a] / hth;
                            }
                            (val, grad)
                        };
                        let (uu, gu) = interp(u);
                        let (vv, gv) = interp(v);
                        let phi = self.coeffs.phi.eval(t, th, &pg, &dofs, &n);
                        let mval = self.coeffs.m.eval(t, th, &pg, &dofs, &n);
                        let fl = flux_tensor(&pg);
                        let grad_term = gu[0] * (fl[(0, 0)] * gv[0] + fl[(0, 1)] * gv[1])
                            + gu[1] * (fl[(1, 0)] * gv[0] + fl[(1, 1)] * gv[1]);
                        acc += 0.25
                            * ht
                            * hth
                            * (phi * grad_term - mval * uu * vv * pg.area_element());
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut total: f64 = parts.iter().sum();
        for &(_, row) in &grid.boundary_rows {
            let t = grid.t_nodes[row];
            for j in 0..res.ntheta {
                let dofs = [grid.dof(row, j), grid.dof(row, j + 1)];
                for &eta in &GAUSS {
                    let th = grid.theta_nodes[j] + eta * hth;
                    let pg = geometry_at(&self.chart, t, th, (row.min(res.nt - 1), j), tol)?;
                    let n = [1.0 - eta, eta];
                    let uu = u[dofs[0]] * n[0] + u[dofs[1]] * n[1];
                    let vv = v[dofs[0]] * n[0] + v[dofs[1]] * n[1];
                    let phi = self.coeffs.phi.eval(t, th, &pg, &dofs, &n);
                    total -= self.alpha() * 0.5 * hth * pg.derivatives.x_th.norm() * phi * uu * vv;
                }
            }
        }
        Ok(total)
    }

    /// Sample a geometric quantity at the dofs.
    pub fn sample_geometry(
        &self,
        f: impl Fn(&PointGeometry) -> f64,
        tol: &ToleranceProfile,
    ) -> Result<Vec<f64>> {
        self.grid
            .dof_coords()
            .into_iter()
            .map(|(t, th)| self.chart.point_geometry_with(t, th, tol).map(|pg| f(&pg)))
            .collect()
    }

    /// Whether the chart is rotationally symmetric about the `t` axis, so
    /// eigenvectors can be labelled by Fourier mode.
    pub fn axisymmetric(&self) -> bool {
        matches!(
            self.chart.kind,
            ChartKind::Catenoid(_) | ChartKind::EquatorialDisk
        )
    }

    /// Matrices in coordinate format, one `i j value` line per stored
    /// lower-triangle entry, each block headed by `# name n`.
    pub fn triplets(&self) -> String {
        let mut out = String::new();
        for (name, mat) in [
            ("K", &self.k),
            ("V", &self.v),
            ("M", &self.m),
            ("B", &self.b),
        ] {
            out.push_str(&format!("# {name} {}\n", mat.dim()));
            for (i, j, v) in mat.lower_triplets() {
                out.push_str(&format!("{i} {j} {v:.17e}\n"));
            }
        }
        out
    }
}

/// Discrete harmonic extension of boundary data `g(component, theta)`:
/// the Laplace stiffness solve with `g` imposed on the boundary dofs.
pub fn harmonic_extension(
    chart: &SurfaceChart,
    res: Resolution,
    g: impl Fn(BoundaryComponent, f64) -> f64,
    tol: &ToleranceProfile,
) -> Result<(Grid, Vec<f64>)> {
    let op = assemble(chart, &CoefficientField::laplace(), res, tol)?;
    let grid = op.grid.clone();
    let mut x = vec![0.0; grid.n_dofs()];
    for (c, j, d) in grid.boundary_nodes() {
        x[d] = g(c, grid.theta_nodes[j]);
    }
    let rhs_full = op.k.matvec(&x);
    let inner = grid.interior();
    let rhs: Vec<f64> = rhs_full[inner.clone()].iter().map(|v| -v).collect();
    let sol = op.k.principal_block(inner.clone()).ldl()?.solve(&rhs);
    x[inner].copy_from_slice(&sol);
    Ok((grid, x))
}
