//! Per-Fourier-mode solvers for the separated catenoid problem
//! `L_n f = f'' + (2/cosh^2 t - n^2) f` on `[-T, T]`.
//!
//! Two independent routes are provided: shooting with an adaptive
//! Dormand-Prince integrator, and a banded second-order discretization whose
//! boundary behaviour is extracted through a Schur complement. Both are
//! compared against the closed forms in the tests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{certify, IndexCertificate};
use crate::error::{FbmsError, Result};
use crate::geometry::CatenoidParams;
use crate::linalg::tridiag::SymTridiagonal;
use crate::ode::{integrate, integrate_fixed, State, Tolerances};
use crate::report::{sort_mode_rows, ModeLabel, ModeRow, Parity, SpectrumKind, SpectrumReport};
use crate::sampled::UniformGrid;
use crate::tolerance::ToleranceProfile;

/// Smallest admissible grid, endpoints included.
pub const MIN_GRID_POINTS: usize = 64;
/// Default grid for the banded solvers.
pub const DEFAULT_GRID_POINTS: usize = 1024;

/// A Dirichlet eigenvalue `mu` of the unweighted interior operator with
/// `|mu| <= KERNEL_BAND * h^2` is treated as a discretized kernel element.
/// The kernel of `L_0` is resolved to `O(h^2)` with a constant well below 1.
const KERNEL_BAND: f64 = 10.0;

fn sech2(t: f64) -> f64 {
    1.0 / t.cosh().powi(2)
}

/// Sampled coefficients of `L_n` on a uniform grid over `[-T, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator {
    pub n: u32,
    pub params: CatenoidParams,
    pub grid: UniformGrid,
    /// `2/cosh^2 t - n^2`.
    pub potential: Vec<f64>,
    /// `c^2 cosh^2 t`.
    pub weight: Vec<f64>,
    /// `1/(c cosh T)`, equal to `T` on the critical catenoid.
    pub boundary_scale: f64,
}

impl ModeOperator {
    pub fn new(params: CatenoidParams, n: u32, points: usize) -> Result<Self> {
        if points < MIN_GRID_POINTS {
            return Err(FbmsError::validation(format!(
                "mode grid needs at least {MIN_GRID_POINTS} points, got {points}"
            )));
        }
        let t = params.half_height;
        if !(t > 0.0 && params.scale > 0.0) {
            return Err(FbmsError::validation(
                "catenoid half-height and scale must be positive",
            ));
        }
        let grid = UniformGrid::new(-t, t, points);
        let nn = (n as f64).powi(2);
        // Nodes computed mirror-exactly so the coefficients are symmetric.
        let last = (points - 1) as f64;
        let nodes: Vec<f64> = (0..points)
            .map(|i| t * (2.0 * i as f64 - last) / last)
            .collect();
        let potential = nodes.iter().map(|&s| 2.0 * sech2(s) - nn).collect();
        let weight = nodes
            .iter()
            .map(|&s| (params.scale * s.cosh()).powi(2))
            .collect();
        Ok(ModeOperator {
            n,
            params,
            grid,
            potential,
            weight,
            boundary_scale: 1.0 / (params.scale * t.cosh()),
        })
    }

    pub fn points(&self) -> usize {
        self.grid.points
    }

    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    /// The same operator with every interval halved.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.params, self.n, self.grid.refined().points)
    }

    fn label(&self, parity: Parity) -> ModeLabel {
        ModeLabel { n: self.n, parity }
    }

    /// `W^{-1/2} (-D^2 - p) W^{-1/2}` on the interior nodes.
    fn weighted_dirichlet(&self) -> SymTridiagonal {
        let h2 = self.step().powi(2);
        let m = self.points() - 2;
        let w = &self.weight[1..=m];
        let diag = (0..m)
            .map(|i| (2.0 / h2 - self.potential[i + 1]) / w[i])
            .collect();
        let off = (0..m - 1)
            .map(|i| -1.0 / (h2 * (w[i] * w[i + 1]).sqrt()))
            .collect();
        SymTridiagonal { diag, off }
    }

    /// `-D^2 - p` on the interior nodes, unweighted.
    fn plain_dirichlet(&self) -> SymTridiagonal {
        let h2 = self.step().powi(2);
        let m = self.points() - 2;
        SymTridiagonal {
            diag: (1..=m).map(|i| 2.0 / h2 - self.potential[i]).collect(),
            off: vec![-1.0 / h2; m - 1],
        }
    }
}

/// Parity of a grid vector on a symmetric grid, from its overlap with its
/// reflection.
fn vector_parity(v: &[f64]) -> Parity {
    let overlap: f64 = v.iter().zip(v.iter().rev()).map(|(a, b)| a * b).sum();
    if overlap >= 0.0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

fn conditioning_error(t: &SymTridiagonal, what: &str, err: FbmsError) -> FbmsError {
    let (lo, hi) = t.gershgorin();
    FbmsError::solver(format!(
        "{what}: {err}; Gershgorin interval [{lo:.3e}, {hi:.3e}], dimension {}",
        t.dim()
    ))
}

/// Raw eigenpairs `(lambda, parity)` of the fixed-boundary problem on the
/// operator's grid.
fn fixed_pairs(op: &ModeOperator, k: usize) -> Result<Vec<(f64, Parity)>> {
    if k == 0 {
        return Err(FbmsError::validation("requested zero eigenvalues"));
    }
    let t = op.weighted_dirichlet();
    let values = t.smallest_eigenvalues(k);
    values
        .into_iter()
        .map(|lam| {
            let v = t
                .eigenvector(lam)
                .map_err(|e| conditioning_error(&t, "fixed-boundary eigenvector", e))?;
            if !lam.is_finite() {
                return Err(conditioning_error(
                    &t,
                    "fixed-boundary eigenvalue",
                    FbmsError::solver("non-finite eigenvalue"),
                ));
            }
            Ok((lam, vector_parity(&v)))
        })
        .collect()
}

/// The `k` smallest eigenvalues of `-(1/weight) L_n` with zero boundary
/// values, from the second-order central-difference discretization.
pub fn fixed_spectrum_1d(
    op: &ModeOperator,
    k: usize,
    tol: &ToleranceProfile,
) -> Result<SpectrumReport> {
    let pairs = fixed_pairs(op, k)?;
    Ok(SpectrumReport::new(
        SpectrumKind::FixedBoundary,
        "mode-1d-fd",
        tol.mode_1d_cuts(),
        pairs
            .into_iter()
            .map(|(l, p)| (l, Some(op.label(p))))
            .collect(),
    ))
}

/// `(4 x_fine - x_coarse) / 3`, the step-halving extrapolation of a
/// second-order quantity.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Fixed-boundary eigenvalues extrapolated from the grid and its refinement.
pub fn fixed_spectrum_1d_extrapolated(
    op: &ModeOperator,
    k: usize,
    tol: &ToleranceProfile,
) -> Result<SpectrumReport> {
    let coarse = fixed_pairs(op, k)?;
    let fine = fixed_pairs(&op.refined()?, k)?;
    let entries = coarse
        .iter()
        .zip(&fine)
        .map(|(&(lc, p), &(lf, _))| (richardson(lc, lf), Some(op.label(p))))
        .collect();
    Ok(SpectrumReport::new(
        SpectrumKind::FixedBoundary,
        "mode-1d-fd-richardson",
        tol.mode_1d_cuts(),
        entries,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchStatus {
    Converged,
    /// The branch solution vanishes on the boundary: it spans the
    /// fixed-boundary kernel and carries no Jacobi-Steklov eigenvalue.
    Deflated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeBranch {
    pub n: u32,
    pub parity: Parity,
    /// `None` when deflated.
    pub delta: Option<f64>,
    pub status: BranchStatus,
    /// `|f(T)| / max |f|` for shooting, `|mu| / h^2` for the banded solver.
    pub kernel_indicator: f64,
}

impl ModeBranch {
    pub fn label(&self) -> ModeLabel {
        ModeLabel {
            n: self.n,
            parity: self.parity,
        }
    }
}

fn mode_rhs(n: u32) -> impl Fn(f64, &State) -> State {
    let nn = (n as f64).powi(2);
    move |t, y| [y[1], -(2.0 * sech2(t) - nn) * y[0]]
}

fn ode_tolerances(tol: &ToleranceProfile) -> Tolerances {
    Tolerances {
        atol: tol.ode_atol,
        rtol: tol.ode_rtol,
    }
}

/// Shooting from `t = 0` with even data `(1, 0)` and odd data `(0, 1)`;
/// `delta = (1/(c cosh T)) f'(T) / f(T)` per parity.
pub fn steklov_spectrum_1d_shooting(
    n: u32,
    params: CatenoidParams,
    tol: &ToleranceProfile,
) -> Result<Vec<ModeBranch>> {
    let t_end = params.half_height;
    let scale = 1.0 / (params.scale * t_end.cosh());
    [(Parity::Even, [1.0, 0.0]), (Parity::Odd, [0.0, 1.0])]
        .into_iter()
        .map(|(parity, y0)| {
            let tr = integrate(mode_rhs(n), 0.0, y0, t_end, ode_tolerances(tol))?;
            let indicator = tr.end[0].abs() / tr.max_abs;
            let deflated = indicator < tol.deflation_threshold;
            Ok(ModeBranch {
                n,
                parity,
                delta: (!deflated).then(|| scale * tr.end[1] / tr.end[0]),
                status: if deflated {
                    BranchStatus::Deflated
                } else {
                    BranchStatus::Converged
                },
                kernel_indicator: indicator,
            })
        })
        .collect()
}

/// Shooting with `steps` fixed Dormand-Prince steps instead of adaptive
/// control; used to observe the integrator's convergence order.
pub fn shooting_delta_fixed_step(
    n: u32,
    parity: Parity,
    params: CatenoidParams,
    steps: usize,
) -> f64 {
    let t_end = params.half_height;
    let y0 = match parity {
        Parity::Even => [1.0, 0.0],
        Parity::Odd => [0.0, 1.0],
    };
    let y = integrate_fixed(mode_rhs(n), 0.0, y0, t_end, steps);
    y[1] / (params.scale * t_end.cosh() * y[0])
}

/// Roots of the two-point Steklov problem solved on all of `[-T, T]`
/// without using the reflection symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointRoots {
    /// Ascending.
    pub deltas: Vec<f64>,
    /// The quadratic lost its leading term: one eigenvalue escaped to
    /// infinity because a fixed-boundary kernel element exists.
    pub deflated: bool,
}

/// With `y1, y2` the fundamental solutions from `-T` (data `(1,0)` and
/// `(0,1)`), `f = a y1 + b y2` satisfies both boundary conditions exactly
/// when `y2(T) d^2 - s (y1(T) + y2'(T)) d + s^2 y1'(T) = 0`, `s` the
/// boundary scale.
pub fn steklov_two_point(
    n: u32,
    params: CatenoidParams,
    tol: &ToleranceProfile,
) -> Result<TwoPointRoots> {
    let t = params.half_height;
    let s = 1.0 / (params.scale * t.cosh());
    let ot = ode_tolerances(tol);
    let y1 = integrate(mode_rhs(n), -t, [1.0, 0.0], t, ot)?;
    let y2 = integrate(mode_rhs(n), -t, [0.0, 1.0], t, ot)?;
    let qa = y2.end[0];
    let qb = -s * (y1.end[0] + y2.end[1]);
    let qc = s * s * y1.end[1];
    // A full-span solve carries global error near `rtol`, so the kernel test
    // cannot be sharper than that.
    let threshold = tol.deflation_threshold.max(10.0 * tol.ode_rtol);
    if qa.abs() < threshold * y2.max_abs {
        return Ok(TwoPointRoots {
            deltas: vec![-qc / qb],
            deflated: true,
        });
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(FbmsError::solver(format!(
            "two-point Steklov quadratic has complex roots (discriminant {disc:.3e})"
        )));
    }
    // Stable root pair.
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let mut deltas = vec![q / qa, qc / q];
    deltas.sort_by(f64::total_cmp);
    Ok(TwoPointRoots {
        deltas,
        deflated: false,
    })
}

/// Boundary quotients of the banded discretization.
///
/// The energy `int f'^2 - p f^2` is assembled with linear elements and
/// trapezoidal potential; eliminating the interior nodes leaves a 2x2
/// Schur complement `S` on the endpoints, and `S u = (delta / s) u` with
/// `s` the boundary scale. By reflection symmetry the eigenvectors are
/// `(1, 1)` and `(1, -1)`. A discrete fixed-boundary kernel is detected
/// from the smallest interior Dirichlet eigenvalue and deflates the branch
/// of matching parity.
pub fn steklov_spectrum_1d_banded(op: &ModeOperator) -> Result<Vec<ModeBranch>> {
    let h = op.step();
    let n_pts = op.points();
    let p = &op.potential;
    let a0 = 1.0 / h - 0.5 * h * p[0];
    // Interior block scaled by 1/h so that it is `-D^2 - p` in FD form.
    let interior = op.plain_dirichlet();
    let m = n_pts - 2;
    let mu = interior.smallest_eigenvalues(1)[0];
    let kernel_indicator = mu.abs() / (h * h);
    let kernel = if kernel_indicator <= KERNEL_BAND {
        let v = interior
            .eigenvector(mu)
            .map_err(|e| conditioning_error(&interior, "interior kernel vector", e))?;
        Some(v)
    } else {
        None
    };
    let kernel_parity = kernel.as_deref().map(vector_parity);
    [(Parity::Even, 1.0), (Parity::Odd, -1.0)]
        .into_iter()
        .map(|(parity, sign)| {
            if kernel_parity == Some(parity) {
                return Ok(ModeBranch {
                    n: op.n,
                    parity,
                    delta: None,
                    status: BranchStatus::Deflated,
                    kernel_indicator,
                });
            }
            // A_II y = e_first + sign e_last, with A_II = h * interior.
            let mut rhs = vec![0.0; m];
            rhs[0] = 1.0;
            rhs[m - 1] += sign;
            let mut y = interior
                .solve_shifted(0.0, &rhs)
                .map_err(|e| conditioning_error(&interior, "interior solve", e))?;
            // The exact solution is orthogonal to a kernel of the other
            // parity; remove the roundoff the near-singular solve amplified
            // along it.
            if let Some(v) = &kernel {
                let c: f64 = v.iter().zip(&y).map(|(a, b)| a * b).sum();
                y.iter_mut().zip(v).for_each(|(yi, vi)| *yi -= c * vi);
            }
            let s00 = a0 - y[0] / (h * h * h);
            Ok(ModeBranch {
                n: op.n,
                parity,
                delta: Some(op.boundary_scale * s00),
                status: BranchStatus::Converged,
                kernel_indicator,
            })
        })
        .collect()
}

/// Banded boundary quotients extrapolated from the grid and its refinement.
pub fn steklov_spectrum_1d_banded_extrapolated(op: &ModeOperator) -> Result<Vec<ModeBranch>> {
    let coarse = steklov_spectrum_1d_banded(op)?;
    let fine = steklov_spectrum_1d_banded(&op.refined()?)?;
    coarse
        .into_iter()
        .zip(fine)
        .map(|(c, f)| {
            if c.status != f.status {
                return Err(FbmsError::solver(format!(
                    "kernel deflation of mode {} {} changed under refinement",
                    c.n, c.parity
                )));
            }
            Ok(ModeBranch {
                delta: c.delta.zip(f.delta).map(|(a, b)| richardson(a, b)),
                ..f
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode1dMethod {
    Shooting,
    /// Banded discretization on the given grid, Richardson-extrapolated.
    Banded {
        points: usize,
    },
}

impl Mode1dMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Mode1dMethod::Shooting => "shooting",
            Mode1dMethod::Banded { .. } => "banded",
        }
    }
}

/// Branches of every mode `n <= n_max`, computed in parallel.
pub fn mode_branches(
    n_max: u32,
    params: CatenoidParams,
    method: Mode1dMethod,
    tol: &ToleranceProfile,
) -> Result<Vec<ModeBranch>> {
    let per_mode: Vec<Vec<ModeBranch>> = (0..=n_max)
        .into_par_iter()
        .map(|n| match method {
            Mode1dMethod::Shooting => steklov_spectrum_1d_shooting(n, params, tol),
            Mode1dMethod::Banded { points } => {
                steklov_spectrum_1d_banded_extrapolated(&ModeOperator::new(params, n, points)?)
            }
        })
        .collect::<Result<_>>()?;
    Ok(per_mode.into_iter().flatten().collect())
}

fn multiplicity(n: u32) -> usize {
    if n == 0 {
        1
    } else {
        2
    }
}

/// Jacobi-Steklov report of all modes `n <= n_max`: `n = 0` values once,
/// `n >= 1` values twice, each tagged with `(n, parity)`.
pub fn assemble_full_spectrum(
    n_max: u32,
    params: CatenoidParams,
    method: Mode1dMethod,
    tol: &ToleranceProfile,
) -> Result<SpectrumReport> {
    if n_max < 1 {
        return Err(FbmsError::validation("n_max must be at least 1"));
    }
    let branches = mode_branches(n_max, params, method, tol)?;
    let mut entries = Vec::new();
    let mut notes = Vec::new();
    for b in &branches {
        match b.delta {
            Some(d) => entries.extend(std::iter::repeat_n((d, Some(b.label())), multiplicity(b.n))),
            None => notes.push(format!(
                "mode {} {} deflated: fixed-boundary kernel (indicator {:.2e})",
                b.n, b.parity, b.kernel_indicator
            )),
        }
    }
    let mut report = SpectrumReport::new(
        SpectrumKind::JacobiSteklov,
        method.name(),
        tol.mode_1d_cuts(),
        entries,
    );
    notes.push(format!("modes n <= {n_max} only"));
    report.notes = notes;
    Ok(report)
}

/// Per-mode rows (one per converged branch) for tabular export.
pub fn branch_rows(branches: &[ModeBranch], method: Option<&str>) -> Vec<ModeRow> {
    let mut rows: Vec<ModeRow> = branches
        .iter()
        .filter_map(|b| {
            b.delta.map(|delta| ModeRow {
                n: b.n,
                parity: b.parity,
                delta,
                multiplicity: multiplicity(b.n),
                method: method.map(str::to_owned),
            })
        })
        .collect();
    sort_mode_rows(&mut rows);
    rows
}

/// Fixed-boundary report of all modes `n <= n_max` (the `k` lowest values
/// of each), extrapolated, with the same multiplicity convention.
pub fn assemble_fixed_spectrum(
    n_max: u32,
    params: CatenoidParams,
    k: usize,
    points: usize,
    tol: &ToleranceProfile,
) -> Result<SpectrumReport> {
    let per_mode: Vec<SpectrumReport> = (0..=n_max)
        .into_par_iter()
        .map(|n| fixed_spectrum_1d_extrapolated(&ModeOperator::new(params, n, points)?, k, tol))
        .collect::<Result<_>>()?;
    let entries = per_mode
        .iter()
        .flat_map(|r| {
            r.eigenvalues.iter().zip(&r.labels).flat_map(|(&v, &l)| {
                std::iter::repeat_n((v, l), multiplicity(l.map_or(0, |l| l.n)))
            })
        })
        .collect();
    let mut report = SpectrumReport::new(
        SpectrumKind::FixedBoundary,
        "mode-1d-fd-richardson",
        tol.mode_1d_cuts(),
        entries,
    );
    report.notes.push(format!(
        "modes n <= {n_max}, {k} lowest eigenvalues per mode"
    ));
    Ok(report)
}

/// Index certificate of a catenoid from the 1D solvers. Modes with
/// `n^2 > 2` have a positive-definite fixed-boundary operator, so the
/// fixed side is complete once `n_max >= 1`; the Jacobi-Steklov side
/// counts the modes up to `n_max`.
pub fn mode_1d_index(
    params: CatenoidParams,
    n_max: u32,
    method: Mode1dMethod,
    points: usize,
    alpha: f64,
    tol: &ToleranceProfile,
) -> Result<IndexCertificate> {
    let fixed = assemble_fixed_spectrum(n_max.max(1), params, 3, points, tol)?;
    let dtn = assemble_full_spectrum(n_max, params, method, tol)?;
    let mut cert = certify(&fixed, &dtn, alpha, tol)?;
    cert.method = format!("mode-1d-{}", method.name());
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::closed_form_spectrum;

    fn crit() -> CatenoidParams {
        CatenoidParams::critical()
    }

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn operator_invariants() {
        let op = ModeOperator::new(crit(), 3, 257).unwrap();
        let m = op.points();
        for i in 0..m {
            assert_eq!(op.potential[i], op.potential[m - 1 - i]);
            assert!(op.weight[i] > 0.0);
        }
        assert!((op.boundary_scale - crit().half_height).abs() < 1e-12);
        assert!(ModeOperator::new(crit(), 0, 63).is_err());
    }

    #[test]
    fn shooting_reproduces_low_modes() {
        let t = crit().half_height;
        let b0 = steklov_spectrum_1d_shooting(0, crit(), &tol()).unwrap();
        assert_eq!(b0[0].status, BranchStatus::Deflated);
        assert!((b0[1].delta.unwrap() - 1.0 / t.sinh().powi(2)).abs() < 1e-9);
        let b1 = steklov_spectrum_1d_shooting(1, crit(), &tol()).unwrap();
        assert!((b1[0].delta.unwrap() + 1.0).abs() < 1e-9);
        assert!((b1[1].delta.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn shooting_matches_closed_form() {
        for p in closed_form_spectrum(crit(), 8) {
            let b = steklov_spectrum_1d_shooting(p.n, crit(), &tol()).unwrap();
            let d = b
                .iter()
                .find(|b| b.parity == p.parity)
                .unwrap()
                .delta
                .unwrap();
            assert!(
                (d - p.delta).abs() < 1e-8 * p.delta.abs().max(1.0),
                "{p:?} vs {d}"
            );
        }
    }

    #[test]
    fn two_point_matches_symmetric_shooting() {
        for n in 0..=6 {
            let roots = steklov_two_point(n, crit(), &tol()).unwrap();
            assert_eq!(roots.deflated, n == 0);
            let mut sym: Vec<f64> = steklov_spectrum_1d_shooting(n, crit(), &tol())
                .unwrap()
                .iter()
                .filter_map(|b| b.delta)
                .collect();
            sym.sort_by(f64::total_cmp);
            assert_eq!(roots.deltas.len(), sym.len());
            for (a, b) in roots.deltas.iter().zip(&sym) {
                assert!((a - b).abs() < 1e-8 * b.abs().max(1.0), "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn shooting_and_banded_agree_through_mode_eight() {
        let shoot = mode_branches(8, crit(), Mode1dMethod::Shooting, &tol()).unwrap();
        let banded =
            mode_branches(8, crit(), Mode1dMethod::Banded { points: 1024 }, &tol()).unwrap();
        for (a, b) in shoot.iter().zip(&banded) {
            assert_eq!((a.n, a.parity, a.status), (b.n, b.parity, b.status));
            if let (Some(x), Some(y)) = (a.delta, b.delta) {
                assert!(
                    (x - y).abs() <= 1e-6 * x.abs(),
                    "n={} {}: {x} vs {y}",
                    a.n,
                    a.parity
                );
            }
        }
    }

    #[test]
    fn delta_increases_with_mode_on_both_branches() {
        let b = mode_branches(30, crit(), Mode1dMethod::Shooting, &tol()).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let d: Vec<f64> = b
                .iter()
                .filter(|b| b.n >= 2 && b.parity == parity)
                .map(|b| b.delta.unwrap())
                .collect();
            assert!(d.windows(2).all(|w| w[1] > w[0]), "{parity}");
        }
    }

    #[test]
    fn fixed_step_shooting_converges_at_fifth_order() {
        let d = |steps| shooting_delta_fixed_step(3, Parity::Even, crit(), steps);
        let (a, b, c) = (d(32), d(64), d(128));
        let order = ((a - b) / (b - c)).log2();
        assert!((4.6..6.0).contains(&order), "order {order}");
    }

    #[test]
    fn banded_deflates_the_support_profile() {
        let op = ModeOperator::new(crit(), 0, 257).unwrap();
        let b = steklov_spectrum_1d_banded(&op).unwrap();
        assert_eq!(b[0].status, BranchStatus::Deflated);
        assert_eq!(b[1].status, BranchStatus::Converged);
        let op1 = ModeOperator::new(crit(), 1, 257).unwrap();
        assert!(steklov_spectrum_1d_banded(&op1)
            .unwrap()
            .iter()
            .all(|b| b.status == BranchStatus::Converged));
    }

    #[test]
    fn banded_richardson_has_second_order_differences() {
        let op = ModeOperator::new(crit(), 3, 129).unwrap();
        let d = |o: &ModeOperator| steklov_spectrum_1d_banded(o).unwrap()[1].delta.unwrap();
        let op2 = op.refined().unwrap();
        let op4 = op2.refined().unwrap();
        let ratio = (d(&op) - d(&op2)) / (d(&op2) - d(&op4));
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn fixed_spectrum_has_zeta_kernel() {
        let op = ModeOperator::new(crit(), 0, 512).unwrap();
        let r = fixed_spectrum_1d_extrapolated(&op, 2, &tol()).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-6, "{}", r.eigenvalues[0]);
        assert_eq!(r.labels[0].unwrap().parity, Parity::Even);
        assert!(r.eigenvalues[1] > 0.0);
        let op1 = ModeOperator::new(crit(), 1, 512).unwrap();
        assert!(fixed_spectrum_1d(&op1, 1, &tol()).unwrap().eigenvalues[0] > 0.0);
    }

    #[test]
    fn full_spectrum_counts() {
        let r = assemble_full_spectrum(5, crit(), Mode1dMethod::Shooting, &tol()).unwrap();
        let t = crit().half_height;
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-9);
        assert!((r.eigenvalues[1] + 1.0).abs() < 1e-9);
        assert!((r.eigenvalues[2] - 1.0 / t.sinh().powi(2)).abs() < 1e-9);
        assert_eq!(r.count_below(1.0 - r.cuts.cluster_tol), 3);
        assert_eq!(r.count_within(1.0, r.cuts.cluster_tol), 2);
        assert!(r.notes.iter().any(|n| n.contains("deflated")));
    }

    #[test]
    fn one_dimensional_index_of_the_critical_catenoid() {
        let cert = mode_1d_index(crit(), 4, Mode1dMethod::Shooting, 256, 1.0, &tol()).unwrap();
        assert_eq!(cert.counts.as_tuple(), (0, 1, 3, 2));
        assert_eq!((cert.index, cert.nullity), (4, 3));
    }
}
