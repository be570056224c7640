//! Fixed-boundary spectra and the deflated Jacobi-Steklov (DtN) map of a
//! [`DiscreteOperator`].
//!
//! The fixed-boundary pencil `(K - V)_II u = lambda M_II u` is solved by
//! block Krylov iteration with the shift-invert operator
//! `(A - sigma M)^-1 M`, `sigma` chosen below the spectrum so the shifted
//! matrix is positive definite, followed by Rayleigh-Ritz on `A`. Counts
//! against a cut are confirmed by the inertia of `A - cut M`.
//!
//! The DtN map is the Schur complement `A_bb - A_bI A_II^+ A_Ib`. When the
//! fixed-boundary problem has a kernel `W`, the pseudo-inverse acts on the
//! `M`-complement of `W` and the boundary space is restricted to the
//! `B`-orthogonal complement of the kernel traces `D_eta W`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discrete::DiscreteOperator;
use crate::error::{FbmsError, Result};
use crate::geometry::{BoundaryComponent, ChartKind};
use crate::linalg::banded::{dot, LdlFactor, SymBanded};
use crate::linalg::dense::{asymmetry, sym_generalized_eigen, symmetrize};
use crate::report::{ModeLabel, Parity, SpectrumKind, SpectrumReport};
use crate::tolerance::{CutTolerances, ToleranceProfile};

/// Problems up to this size are solved densely.
const DENSE_LIMIT: usize = 400;
const BLOCK: usize = 4;
/// Normwise backward error `|A x - theta M x| / ((|A| + |theta| |M|) |x|)`.
const RITZ_TOL: f64 = 1e-12;
const KRYLOV_SEED: u64 = 0x5eed_f1b5;

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Shift just below the spectrum of `(a, m)`. A lower point is found by
/// stepping down from `-1`, a point above `k` eigenvalues by stepping up,
/// and a few bisections on the lowest eigenvalue move the shift close to
/// it so that clustered low eigenvalues separate under inversion.
fn positive_shift(a: &SymBanded, m: &SymBanded, k: usize) -> Result<(f64, LdlFactor)> {
    let count = |x: f64| -> Option<(usize, Option<LdlFactor>)> {
        let f = a.add_scaled(-x, m).ok()?.ldl().ok()?;
        let neg = f.negative_pivots();
        Some((neg, (neg == 0).then_some(f)))
    };
    let mut lo = -1.0;
    let mut factor = None;
    for _ in 0..60 {
        if let Some((0, f)) = count(lo) {
            factor = f;
            break;
        }
        lo = 2.0 * lo - 1.0;
    }
    let mut factor = factor.ok_or_else(|| {
        FbmsError::solver("no positive-definite shift found for the fixed-boundary pencil")
    })?;
    let mut step = 1.0;
    let mut hi = lo + step;
    for _ in 0..60 {
        match count(hi) {
            Some((c, _)) if c >= k => break,
            Some((0, Some(f))) => {
                lo = hi;
                factor = f;
            }
            _ => {}
        }
        step *= 2.0;
        hi = lo + step;
    }
    for _ in 0..6 {
        let mid = 0.5 * (lo + hi);
        match count(mid) {
            Some((0, Some(f))) => {
                lo = mid;
                factor = f;
            }
            _ => hi = mid,
        }
    }
    Ok((lo, factor))
}

/// Number of eigenvalues of `(a, m)` strictly below `x`, by inertia.
pub fn inertia_count(a: &SymBanded, m: &SymBanded, x: f64) -> Result<usize> {
    Ok(a.add_scaled(-x, m)?.ldl()?.negative_pivots())
}

fn dense_of(a: &SymBanded) -> DMatrix<f64> {
    DMatrix::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
}

/// The `k` smallest eigenpairs of `a x = lambda m x`, eigenvectors
/// `m`-orthonormal.
pub fn smallest_eigenpairs(
    a: &SymBanded,
    m: &SymBanded,
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(FbmsError::validation(format!(
            "cannot request {k} eigenvalues of a {n}-dimensional pencil"
        )));
    }
    if n <= DENSE_LIMIT {
        let (vals, vecs) = sym_generalized_eigen(&dense_of(a), &dense_of(m))?;
        let vectors = (0..k)
            .map(|c| vecs.column(c).iter().copied().collect())
            .collect();
        return Ok((vals[..k].to_vec(), vectors));
    }
    let (_, factor) = positive_shift(a, m, k)?;
    let (a_norm, m_norm) = (a.norm_inf(), m.norm_inf());
    let mut rng = ChaCha8Rng::seed_from_u64(KRYLOV_SEED);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut m_basis: Vec<Vec<f64>> = Vec::new();
    let mut a_basis: Vec<Vec<f64>> = Vec::new();
    let mut block: Vec<Vec<f64>> = (0..BLOCK)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let max_dim = n.min((8 * k + 200).max(320));
    let mut last_check = 0;
    loop {
        let mut added = Vec::new();
        for mut v in block.drain(..) {
            let before = dot(&v, &m.matvec(&v)).sqrt();
            for _ in 0..2 {
                for (q, mq) in basis.iter().zip(&m_basis) {
                    let c = dot(mq, &v);
                    axpy(&mut v, -c, q);
                }
            }
            let mv = m.matvec(&v);
            let norm = dot(&v, &mv).sqrt();
            if !(norm > 1e-10 * before) {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let mv: Vec<f64> = mv.iter().map(|x| x / norm).collect();
            a_basis.push(a.matvec(&v));
            basis.push(v);
            m_basis.push(mv);
            added.push(basis.len() - 1);
        }
        let dim = basis.len();
        let exhausted = added.is_empty() || dim >= max_dim;
        if dim >= k + 2 * BLOCK && (dim - last_check >= 4 * BLOCK || exhausted) {
            last_check = dim;
            let h = DMatrix::from_fn(dim, dim, |i, j| dot(&basis[i], &a_basis[j]));
            let mut h = h;
            symmetrize(&mut h);
            let eig = SymmetricEigen::new(h);
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let mut values = Vec::with_capacity(k);
            let mut vectors = Vec::with_capacity(k);
            let mut worst: f64 = 0.0;
            for &c in order.iter().take(k) {
                let theta = eig.eigenvalues[c];
                let y = eig.eigenvectors.column(c);
                let mut x = vec![0.0; n];
                let mut ax = vec![0.0; n];
                let mut mx = vec![0.0; n];
                for (i, &yi) in y.iter().enumerate() {
                    axpy(&mut x, yi, &basis[i]);
                    axpy(&mut ax, yi, &a_basis[i]);
                    axpy(&mut mx, yi, &m_basis[i]);
                }
                let r: f64 = ax
                    .iter()
                    .zip(&mx)
                    .map(|(p, q)| (p - theta * q).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let scale = (a_norm + theta.abs() * m_norm) * dot(&x, &x).sqrt();
                worst = worst.max(r / scale.max(f64::MIN_POSITIVE));
                values.push(theta);
                vectors.push(x);
            }
            if worst < RITZ_TOL {
                return Ok((values, vectors));
            }
            if exhausted {
                return Err(FbmsError::solver(format!(
                    "block Krylov stalled at dimension {dim} with relative residual {worst:.2e}"
                )));
            }
        } else if exhausted {
            return Err(FbmsError::solver(format!(
                "Krylov basis exhausted at dimension {dim}"
            )));
        }
        block = added.iter().map(|&i| factor.solve(&m_basis[i])).collect();
    }
}

/// Dominant Fourier mode of values laid out on grid rows, and the overlap
/// of each row with its mirror row.
fn fourier_mode(rows: &[Vec<f64>], thetas: &[f64]) -> u32 {
    let n_theta = thetas.len();
    let mut best = (0u32, -1.0f64);
    for n in 0..=n_theta / 2 {
        let e: f64 = rows
            .iter()
            .map(|r| {
                let (mut c, mut s) = (0.0, 0.0);
                for (v, th) in r.iter().zip(thetas) {
                    c += v * (n as f64 * th).cos();
                    s += v * (n as f64 * th).sin();
                }
                let w = if n == 0 { 2.0 } else { 1.0 };
                w * (c * c + s * s)
            })
            .sum();
        if e > best.1 * (1.0 + 1e-9) {
            best = (n as u32, e);
        }
    }
    best.0
}

fn mirror_parity(rows: &[Vec<f64>]) -> Parity {
    let m = rows.len();
    let overlap: f64 = (0..m).map(|r| dot(&rows[r], &rows[m - 1 - r])).sum();
    if overlap >= 0.0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Mode label of a full dof vector on an axisymmetric chart. The disk has
/// no reflection in `t`; its labels carry `Even`.
pub fn mode_label(op: &DiscreteOperator, full: &[f64], boundary_only: bool) -> Option<ModeLabel> {
    if !op.axisymmetric() {
        return None;
    }
    let g = &op.grid;
    let rows: Vec<Vec<f64>> = if boundary_only {
        g.boundary_rows
            .iter()
            .map(|&(_, r)| g.row_values(full, r))
            .collect()
    } else {
        (0..=g.resolution.nt)
            .filter(|&r| !(g.merged_center && r == 0))
            .map(|r| g.row_values(full, r))
            .collect()
    };
    let n = fourier_mode(&rows, &g.theta_nodes);
    let parity = match op.chart.kind {
        ChartKind::Catenoid(_) => mirror_parity(&rows),
        _ => Parity::Even,
    };
    Some(ModeLabel { n, parity })
}

/// Fixed-boundary eigenpairs together with their report.
#[derive(Debug, Clone)]
pub struct FixedSpectrum {
    pub report: SpectrumReport,
    pub values: Vec<f64>,
    /// Interior vectors, `M_II`-orthonormal.
    pub vectors: Vec<Vec<f64>>,
    /// `(# below -null_tol, # within the null band)` from inertia.
    pub inertia: Option<(usize, usize)>,
}

impl FixedSpectrum {
    /// Eigenpairs inside the null band.
    pub fn kernel(&self) -> Vec<(f64, &Vec<f64>)> {
        self.values
            .iter()
            .zip(&self.vectors)
            .filter(|(v, _)| v.abs() <= self.report.cuts.null_tol)
            .map(|(&v, w)| (v, w))
            .collect()
    }
}

fn interior_to_full(op: &DiscreteOperator, x: &[f64]) -> Vec<f64> {
    let mut full = vec![0.0; op.n_dofs()];
    full[op.grid.interior()].copy_from_slice(x);
    full
}

/// The `k` smallest fixed-boundary eigenvalues. The null and negative
/// counts are cross-checked against the inertia of `A - cut M`; a
/// disagreement becomes a warning.
pub fn fixed_spectrum(
    op: &DiscreteOperator,
    k: usize,
    cuts: CutTolerances,
) -> Result<FixedSpectrum> {
    let inner = op.grid.interior();
    let a = op.q_matrix().principal_block(inner.clone());
    let m = op.m.principal_block(inner);
    let (values, vectors) = smallest_eigenpairs(&a, &m, k)?;
    let entries = values
        .iter()
        .zip(&vectors)
        .map(|(&v, x)| (v, mode_label(op, &interior_to_full(op, x), false)))
        .collect();
    let mut report = SpectrumReport::new(
        SpectrumKind::FixedBoundary,
        format!("full-2d-{}", op.grid.resolution),
        cuts,
        entries,
    );
    let below = inertia_count(&a, &m, -cuts.null_tol).ok();
    let upto = inertia_count(&a, &m, cuts.null_tol).ok();
    let inertia = below.zip(upto).map(|(b, u)| (b, u - b));
    if let Some((neg, null)) = inertia {
        let counted = (
            report.count_below(-cuts.null_tol),
            report.count_within(0.0, cuts.null_tol),
        );
        if counted != (neg, null) {
            report.warnings.push(format!(
                "eigenvalue counts {counted:?} differ from inertia counts {:?}",
                (neg, null)
            ));
        } else {
            report
                .notes
                .push("negative and null counts confirmed by inertia".into());
        }
    } else {
        report
            .notes
            .push("inertia check skipped: shifted factorization needs pivoting".into());
    }
    if values.last().is_some_and(|&v| v <= cuts.null_tol) {
        report.warnings.push(format!(
            "all {k} requested eigenvalues lie at or below the null band; counts may be incomplete"
        ));
    }
    report.notes.extend(op.notes.iter().cloned());
    Ok(FixedSpectrum {
        report,
        values,
        vectors,
        inertia,
    })
}

/// Smallest fixed-boundary spectrum that reaches past the null band:
/// `k` grows until the largest computed eigenvalue exceeds `null_tol`.
pub fn fixed_spectrum_covering(
    op: &DiscreteOperator,
    k0: usize,
    cuts: CutTolerances,
) -> Result<FixedSpectrum> {
    let dim = op.grid.interior().len();
    let mut k = k0.max(1).min(dim);
    loop {
        let fs = fixed_spectrum(op, k, cuts)?;
        let covered = fs.values.last().is_some_and(|&v| v > cuts.null_tol);
        if covered || k == dim {
            return Ok(fs);
        }
        k = (2 * k).min(dim);
    }
}

/// Interior solves with the fixed-boundary kernel projected out.
#[derive(Debug, Clone)]
struct InteriorSolver {
    factor: LdlFactor,
    m_ii: SymBanded,
    kernel: Vec<Vec<f64>>,
    kernel_values: Vec<f64>,
}

impl InteriorSolver {
    /// `P A^-1 (I - M W W^T) r`, `P = I - W W^T M`.
    fn pinv(&self, r: &[f64]) -> Vec<f64> {
        let mut rr = r.to_vec();
        for w in &self.kernel {
            let c = dot(w, r);
            let mw = self.m_ii.matvec(w);
            axpy(&mut rr, -c, &mw);
        }
        let mut y = self.factor.solve(&rr);
        for w in &self.kernel {
            let c = dot(w, &self.m_ii.matvec(&y));
            axpy(&mut y, -c, w);
        }
        y
    }
}

/// The Jacobi-Steklov Dirichlet-to-Neumann map on the boundary dofs.
#[derive(Debug, Clone)]
pub struct DtNMap {
    pub boundary_dofs: Vec<usize>,
    pub s_bb: DMatrix<f64>,
    pub b_bb: DMatrix<f64>,
    pub kernel_dim: usize,
    /// Columns `b_i` with `B b_i = A_bI w_i`: the conormal derivatives of
    /// the kernel in the discrete Green sense.
    pub kernel_boundary_traces: DMatrix<f64>,
    /// One-sided second-order differences `sqrt(g^tt) d_t w_i`, for
    /// comparison with the Green traces.
    pub fd_traces: DMatrix<f64>,
    /// `I - T (T^T B T)^-1 T^T B`.
    pub deflation_projector: DMatrix<f64>,
    /// Orthonormal basis of `{h : T^T B h = 0}`.
    pub deflated_basis: DMatrix<f64>,
    /// `max |S - S^T| / max |S|` before symmetrization.
    pub asymmetry: f64,
    pub cuts: CutTolerances,
    pub method: String,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    interior: std::ops::Range<usize>,
    solver: InteriorSolver,
}

/// Relative size of `b` below which a kernel trace counts as degenerate.
const TRACE_TOL: f64 = 1e-8;

/// Build the DtN map; the kernel is taken from `fixed` (eigenpairs in the
/// null band).
pub fn build_dtn(
    op: &DiscreteOperator,
    fixed: &FixedSpectrum,
    tol: &ToleranceProfile,
) -> Result<DtNMap> {
    let cuts = fixed.report.cuts;
    let inner = op.grid.interior();
    let a_full = op.q_matrix();
    let a_ii = a_full.principal_block(inner.clone());
    let m_ii = op.m.principal_block(inner.clone());
    let mut warnings = Vec::new();
    let mut notes = Vec::new();

    let mut kernel = Vec::new();
    let mut kernel_values = Vec::new();
    for (&lam, w) in fixed.values.iter().zip(&fixed.vectors) {
        let ratio = lam.abs() / cuts.null_tol;
        if ratio > 1.0 / tol.borderline_factor && ratio < tol.borderline_factor {
            warnings.push(format!(
                "kernel detection unstable: fixed eigenvalue {lam:.3e} within {}x of null_tol {:.1e}",
                tol.borderline_factor, cuts.null_tol
            ));
        }
        if lam.abs() <= cuts.null_tol {
            kernel.push(w.clone());
            kernel_values.push(lam);
        }
    }
    let factor = a_ii.ldl().map_err(|e| {
        if kernel.is_empty() {
            FbmsError::solver(format!(
                "interior block singular without a detected kernel: {e}"
            ))
        } else {
            e
        }
    })?;
    let solver = InteriorSolver {
        factor,
        m_ii,
        kernel,
        kernel_values,
    };

    let bdofs = op.grid.boundary_dofs();
    let nb = bdofs.len();
    let bw = a_full.bandwidth();
    let coupling = |b: usize| -> Vec<f64> {
        let mut r = vec![0.0; inner.len()];
        let lo = b.saturating_sub(bw).max(inner.start);
        let hi = (b + bw + 1).min(inner.end);
        for i in lo..hi {
            r[i - inner.start] = a_full.get(i, b);
        }
        r
    };
    // A_bI x for an interior vector x.
    let apply_bi = |x: &[f64]| -> Vec<f64> {
        bdofs
            .iter()
            .map(|&b| {
                let lo = b.saturating_sub(bw).max(inner.start);
                let hi = (b + bw + 1).min(inner.end);
                (lo..hi)
                    .map(|i| a_full.get(b, i) * x[i - inner.start])
                    .sum()
            })
            .collect()
    };
    let columns: Vec<Vec<f64>> = (0..nb)
        .into_par_iter()
        .map(|c| {
            let x = solver.pinv(&coupling(bdofs[c]));
            let bx = apply_bi(&x);
            (0..nb)
                .map(|r| a_full.get(bdofs[r], bdofs[c]) - bx[r])
                .collect()
        })
        .collect();
    let mut s_bb = DMatrix::from_fn(nb, nb, |r, c| columns[c][r]);
    let asym = asymmetry(&s_bb);
    symmetrize(&mut s_bb);
    let b_bb = DMatrix::from_fn(nb, nb, |r, c| op.b.get(bdofs[r], bdofs[c]));

    // Kernel traces.
    let kd = solver.kernel.len();
    let b_chol = b_bb
        .clone()
        .cholesky()
        .ok_or_else(|| FbmsError::solver("boundary mass is not positive definite"))?;
    let mut traces = DMatrix::zeros(nb, kd);
    let mut fd = DMatrix::zeros(nb, kd);
    let g = &op.grid;
    let ht = g.ht();
    let nt = g.resolution.nt;
    let scales: Vec<f64> = g
        .boundary_nodes()
        .map(|(c, j, _)| op.chart.boundary_scale(c, g.theta_nodes[j]))
        .collect::<Result<_>>()?;
    let mut kept = Vec::new();
    for (i, w) in solver.kernel.iter().enumerate() {
        let t = b_chol.solve(&DVector::from_vec(apply_bi(w)));
        let full = interior_to_full(op, w);
        for (r, (c, j, _)) in g.boundary_nodes().enumerate() {
            let (adj, next) = match c {
                BoundaryComponent::Upper => (nt - 1, nt - 2),
                BoundaryComponent::Lower => (1, 2),
            };
            let d = (-4.0 * full[g.dof(adj, j)] + full[g.dof(next, j)]) / (2.0 * ht);
            fd[(r, i)] = scales[r] * d;
        }
        let b_norm = (t.transpose() * &b_bb * &t)[(0, 0)].sqrt();
        let fd_norm = fd.column(i).norm().max(f64::MIN_POSITIVE);
        let diff = (&t - fd.column(i)).norm() / fd_norm;
        notes.push(format!(
            "kernel {i}: lambda = {:.3e}, Green vs one-sided trace relative difference {diff:.2e}",
            solver.kernel_values[i]
        ));
        if b_norm < TRACE_TOL * (1.0 + fd_norm) {
            warnings.push(format!(
                "kernel {i} has a numerically vanishing boundary trace; proceeding without deflating it"
            ));
        } else {
            kept.push(i);
        }
        traces.set_column(i, &t);
    }
    let traces = DMatrix::from_fn(nb, kept.len(), |r, c| traces[(r, kept[c])]);
    let fd = DMatrix::from_fn(nb, kept.len(), |r, c| fd[(r, kept[c])]);
    let (projector, basis) = deflation(&traces, &b_bb)?;
    if kd > 0 {
        notes.push(format!(
            "deflated {} kernel trace(s) from the boundary space",
            kept.len()
        ));
    }
    Ok(DtNMap {
        boundary_dofs: bdofs,
        s_bb,
        b_bb,
        kernel_dim: kept.len(),
        kernel_boundary_traces: traces,
        fd_traces: fd,
        deflation_projector: projector,
        deflated_basis: basis,
        asymmetry: asym,
        cuts,
        method: format!("full-2d-{}", g.resolution),
        warnings,
        notes,
        interior: inner,
        solver,
    })
}

/// Projector onto the `B`-complement of `span(T)` and an orthonormal basis
/// of that complement.
fn deflation(t: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let nb = b.nrows();
    if t.ncols() == 0 {
        return Ok((DMatrix::identity(nb, nb), DMatrix::identity(nb, nb)));
    }
    let bt = b * t;
    let gram = t.transpose() * &bt;
    let ginv = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| FbmsError::solver("kernel traces are linearly dependent"))?;
    let projector = DMatrix::identity(nb, nb) - t * ginv * bt.transpose();
    // Complement of range(B T) in the Euclidean sense.
    let q = bt.qr().q();
    let mut comp = DMatrix::identity(nb, nb) - &q * q.transpose();
    symmetrize(&mut comp);
    let eig = SymmetricEigen::new(comp);
    let cols: Vec<usize> = (0..nb).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let basis = DMatrix::from_fn(nb, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]);
    Ok((projector, basis))
}

/// Deflated DtN eigenpairs, ascending; eigenvectors are boundary vectors.
#[derive(Debug, Clone)]
pub struct DtnEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl DtNMap {
    pub fn boundary_dim(&self) -> usize {
        self.boundary_dofs.len()
    }

    pub fn deflated_dim(&self) -> usize {
        self.deflated_basis.ncols()
    }

    pub fn eigen(&self) -> Result<DtnEigen> {
        let z = &self.deflated_basis;
        let s = z.transpose() * &self.s_bb * z;
        let b = z.transpose() * &self.b_bb * z;
        let (values, y) = sym_generalized_eigen(&s, &b)?;
        Ok(DtnEigen {
            values,
            vectors: z * y,
        })
    }

    /// Interior part of the extension `-A_II^+ A_Ib h` combined with `h`.
    pub fn extend(&self, op: &DiscreteOperator, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.boundary_dim() {
            return Err(FbmsError::DimensionMismatch {
                expected: self.boundary_dim(),
                got: h.len(),
            });
        }
        let a = op.q_matrix();
        let mut full = vec![0.0; op.n_dofs()];
        for (&d, &v) in self.boundary_dofs.iter().zip(h) {
            full[d] = v;
        }
        let r: Vec<f64> = a.matvec(&full)[self.interior.clone()].to_vec();
        let x = self.solver.pinv(&r);
        for (i, xi) in x.into_iter().enumerate() {
            full[self.interior.start + i] = -xi;
        }
        Ok(full)
    }

    /// `Q(u, v)` with the kernel eigenvalues set to zero:
    /// `u^T A v - sum_i lambda_i (w_i^T M u_I)(w_i^T M v_I)`. The discrete
    /// kernel only approximates an exact one; this is the form for which it
    /// is exact.
    pub fn snapped_q(&self, op: &DiscreteOperator, u: &[f64], v: &[f64]) -> Result<f64> {
        let mut q = op.bilinear_q(u, v)?;
        let ui = &u[self.interior.clone()];
        let vi = &v[self.interior.clone()];
        for (w, &lam) in self.solver.kernel.iter().zip(&self.solver.kernel_values) {
            let mw = self.solver.m_ii.matvec(w);
            q -= lam * dot(&mw, ui) * dot(&mw, vi);
        }
        Ok(q)
    }

    /// `S` built on [`Self::snapped_q`].
    pub fn snapped_s(&self, op: &DiscreteOperator, u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self.snapped_q(op, u, v)? - op.alpha() * op.b.form(u, v))
    }

    /// Kernel vectors as full dof vectors (zero on the boundary).
    pub fn kernel_vectors(&self, op: &DiscreteOperator) -> Vec<Vec<f64>> {
        self.solver
            .kernel
            .iter()
            .map(|w| interior_to_full(op, w))
            .collect()
    }

    /// `|h^T S_bb h - Q(h_ext, h_ext)| / max(|h^T S_bb h|, h^T B h)`.
    pub fn galerkin_defect(&self, op: &DiscreteOperator, h: &[f64]) -> Result<f64> {
        let hv = DVector::from_column_slice(h);
        let lhs = (hv.transpose() * &self.s_bb * &hv)[(0, 0)];
        let bn = (hv.transpose() * &self.b_bb * &hv)[(0, 0)];
        let ext = self.extend(op, h)?;
        let rhs = op.bilinear_q(&ext, &ext)?;
        Ok((lhs - rhs).abs() / lhs.abs().max(bn).max(f64::MIN_POSITIVE))
    }

    /// `max |P b_i|` relative to `max |b_i|`.
    pub fn deflation_residual(&self) -> f64 {
        if self.kernel_dim == 0 {
            return 0.0;
        }
        let pb = &self.deflation_projector * &self.kernel_boundary_traces;
        pb.amax() / self.kernel_boundary_traces.amax()
    }

    /// Idempotence and `B`-self-adjointness defects of the projector.
    pub fn projector_defects(&self) -> (f64, f64) {
        let p = &self.deflation_projector;
        let idem = (p * p - p).amax() / p.amax().max(1.0);
        let bp = &self.b_bb * p;
        let adj = (&bp - bp.transpose()).amax() / self.b_bb.amax();
        (idem, adj)
    }
}

/// The `k` smallest deflated Jacobi-Steklov eigenvalues as a report.
pub fn dtn_spectrum(op: &DiscreteOperator, dtn: &DtNMap, k: usize) -> Result<SpectrumReport> {
    if k == 0 || k > dtn.deflated_dim() {
        return Err(FbmsError::validation(format!(
            "requested {k} eigenvalues of a {}-dimensional deflated boundary space",
            dtn.deflated_dim()
        )));
    }
    let eig = dtn.eigen()?;
    let entries = (0..k)
        .map(|c| {
            let mut full = vec![0.0; op.n_dofs()];
            for (r, &d) in dtn.boundary_dofs.iter().enumerate() {
                full[d] = eig.vectors[(r, c)];
            }
            (eig.values[c], mode_label(op, &full, true))
        })
        .collect();
    let mut report = SpectrumReport::new(
        SpectrumKind::JacobiSteklov,
        dtn.method.clone(),
        dtn.cuts,
        entries,
    );
    report.warnings = dtn.warnings.clone();
    report.notes = dtn.notes.clone();
    if dtn.asymmetry > 1e-10 {
        report.warnings.push(format!(
            "Schur complement asymmetry {:.2e} before symmetrization",
            dtn.asymmetry
        ));
    }
    Ok(report)
}

/// Both 2D reports for one operator, sharing the resolution-scaled cuts.
#[derive(Debug, Clone)]
pub struct Spectra2d {
    pub fixed: FixedSpectrum,
    pub dtn: DtNMap,
    pub dtn_report: SpectrumReport,
}

/// Fixed spectrum (reaching past the null band), DtN map and the `k_dtn`
/// lowest Jacobi-Steklov eigenvalues.
pub fn spectra_2d(
    op: &DiscreteOperator,
    k_dtn: usize,
    tol: &ToleranceProfile,
) -> Result<Spectra2d> {
    let res = op.grid.resolution;
    let cuts = tol.grid_2d_cuts(res.nt, res.ntheta);
    let fixed = fixed_spectrum_covering(op, 6, cuts)?;
    let dtn = build_dtn(op, &fixed, tol)?;
    let k = k_dtn.min(dtn.deflated_dim());
    let dtn_report = dtn_spectrum(op, &dtn, k)?;
    Ok(Spectra2d {
        fixed,
        dtn,
        dtn_report,
    })
}

/// Sorted values extrapolated from a grid and its doubling, pairing
/// entries by rank: `(4 fine - coarse) / 3`.
pub fn richardson_by_rank(coarse: &[f64], fine: &[f64]) -> Vec<f64> {
    coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// Observed convergence order from three successive errors or differences.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse.abs() / e_fine.abs()).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{assemble, CoefficientField, Resolution};
    use crate::geometry::{make_critical_catenoid, make_equatorial_disk};

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn laplacian_1d(n: usize) -> (SymBanded, SymBanded) {
        let mut a = SymBanded::zeros(n, 1);
        let mut m = SymBanded::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            m.add(i, i, 1.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        (a, m)
    }

    #[test]
    fn krylov_matches_the_exact_tridiagonal_spectrum() {
        let n = 900;
        let (a, m) = laplacian_1d(n);
        let (vals, vecs) = smallest_eigenpairs(&a, &m, 6).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!(
                (v - exact).abs() < 1e-10 * exact.max(1e-3),
                "{v} vs {exact}"
            );
        }
        assert!((dot(&vecs[0], &m.matvec(&vecs[0])) - 1.0).abs() < 1e-10);
        assert_eq!(inertia_count(&a, &m, vals[2] + 1e-9).unwrap(), 3);
    }

    #[test]
    fn krylov_resolves_double_eigenvalues() {
        let n = 500;
        let mut a = SymBanded::zeros(n, 0);
        let m = {
            let mut m = SymBanded::zeros(n, 0);
            (0..n).for_each(|i| m.add(i, i, 1.0));
            m
        };
        for i in 0..n {
            a.add(i, i, 1.0 + (i / 2) as f64);
        }
        let (vals, _) = smallest_eigenpairs(&a, &m, 5).unwrap();
        for (v, e) in vals.iter().zip([1.0, 1.0, 2.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-10);
        }
    }

    #[test]
    fn disk_fixed_spectrum_is_positive_and_dtn_is_steklov() {
        let chart = make_equatorial_disk();
        let op = assemble(
            &chart,
            &CoefficientField::ball(),
            Resolution::square(32),
            &tol(),
        )
        .unwrap();
        let s = spectra_2d(&op, 5, &tol()).unwrap();
        assert!(s.fixed.values[0] > 1.0);
        assert_eq!(s.dtn.kernel_dim, 0);
        let v = &s.dtn_report.eigenvalues;
        for (got, want) in v.iter().zip([0.0, 1.0, 1.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 5e-2, "{v:?}");
        }
    }

    #[test]
    fn catenoid_dtn_is_deflated_and_consistent() {
        let chart = make_critical_catenoid();
        let op = assemble(
            &chart,
            &CoefficientField::ball(),
            Resolution::square(32),
            &tol(),
        )
        .unwrap();
        let s = spectra_2d(&op, 8, &tol()).unwrap();
        assert_eq!(s.dtn.kernel_dim, 1);
        assert!(s.dtn.deflation_residual() < 1e-10);
        let (idem, adj) = s.dtn.projector_defects();
        assert!(idem < 1e-10 && adj < 1e-10, "{idem} {adj}");
        assert!(s.dtn.asymmetry < 1e-10, "{}", s.dtn.asymmetry);
        let v = &s.dtn_report.eigenvalues;
        assert!(
            (v[0] + 1.0).abs() < 2e-2 && (v[1] + 1.0).abs() < 2e-2,
            "{v:?}"
        );
        let h: Vec<f64> = (0..s.dtn.boundary_dim())
            .map(|i| ((i * 7) as f64).sin())
            .collect();
        let hd = (&s.dtn.deflation_projector * DVector::from_vec(h))
            .iter()
            .copied()
            .collect::<Vec<_>>();
        assert!(s.dtn.galerkin_defect(&op, &hd).unwrap() < 1e-10);
    }

    fn catenoid_op(n: usize, coeffs: CoefficientField) -> DiscreteOperator {
        assemble(
            &make_critical_catenoid(),
            &coeffs,
            Resolution::square(n),
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn support_function_rayleigh_quotient_vanishes_under_refinement() {
        let quotient = |n: usize| {
            let op = catenoid_op(n, CoefficientField::ball());
            let z = op.sample_geometry(|pg| pg.zeta, &tol()).unwrap();
            op.bilinear_q(&z, &z).unwrap() / op.m.form(&z, &z)
        };
        let (q32, q64) = (quotient(32), quotient(64));
        assert!(
            q64.abs() < 4e-3 && q64.abs() < q32.abs() / 3.0,
            "{q32} {q64}"
        );
    }

    #[test]
    fn fixed_spectrum_does_not_depend_on_the_theta_offset() {
        let chart = make_critical_catenoid();
        let res = Resolution::square(24);
        let a = assemble(&chart, &CoefficientField::ball(), res, &tol()).unwrap();
        let b = crate::discrete::assemble_with_offset(
            &chart,
            &CoefficientField::ball(),
            res,
            0.37,
            &tol(),
        )
        .unwrap();
        let cuts = tol().grid_2d_cuts(24, 24);
        let (fa, fb) = (
            fixed_spectrum(&a, 5, cuts).unwrap(),
            fixed_spectrum(&b, 5, cuts).unwrap(),
        );
        for (x, y) in fa.values.iter().zip(&fb.values) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1.0), "{x} {y}");
        }
    }

    #[test]
    fn a_stronger_potential_creates_negative_directions() {
        let op = catenoid_op(32, CoefficientField::ball().with_potential_scale(10.0));
        let cuts = tol().grid_2d_cuts(32, 32);
        let partial = fixed_spectrum(&op, 4, cuts).unwrap();
        assert!(partial
            .report
            .warnings
            .iter()
            .any(|w| w.contains("counts may be incomplete")));
        let fs = fixed_spectrum_covering(&op, 4, cuts).unwrap();
        assert!(fs.values[0] < -cuts.null_tol);
        assert_eq!(fs.inertia.unwrap().0, fs.report.count_below(-cuts.null_tol));
    }

    #[test]
    fn eigenvalues_decrease_under_nested_refinement() {
        let cuts = tol().grid_2d_cuts(32, 32);
        let coarse = fixed_spectrum(&catenoid_op(16, CoefficientField::ball()), 3, cuts).unwrap();
        let fine = fixed_spectrum(&catenoid_op(32, CoefficientField::ball()), 3, cuts).unwrap();
        for (c, f) in coarse.values.iter().zip(&fine.values) {
            assert!(f < c, "{c} -> {f}");
        }
    }

    #[test]
    fn richardson_by_rank_removes_a_quadratic_error() {
        let exact = [1.0, 2.0];
        let coarse: Vec<f64> = exact.iter().map(|e| e + 0.4).collect();
        let fine: Vec<f64> = exact.iter().map(|e| e + 0.1).collect();
        let r = richardson_by_rank(&coarse, &fine);
        assert!((r[0] - 1.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
        assert!((observed_order(0.4, 0.1) - 2.0).abs() < 1e-14);
    }
}
