//! Randomized checks of the `S`-orthogonal splitting behind the index
//! formula.
//!
//! Boundary data splits into a part `h` that is `phi`-orthogonal to the
//! kernel traces and a part `b` in their span. The extension `h^` of `h`,
//! corrected by kernel elements so that `D_eta h^` is orthogonal to the
//! traces, is `S`-orthogonal to every `w` with boundary values `b`.
//! For `u` with boundary values `D_eta w0` (`w0` a kernel element),
//! `S(u + c w0, u + c w0) = S(u, u) + 2 c int_bdry phi u^2`.
//!
//! The discrete kernel has eigenvalue `O(h^2)` rather than zero; both
//! identities are checked for the form with that eigenvalue set to zero
//! (see [`DtNMap::snapped_s`]).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discrete::DiscreteOperator;
use crate::error::{FbmsError, Result};
use crate::spectral::DtNMap;

pub const DEFAULT_TRIALS: usize = 20;
const SEED: u64 = 0x0dec_0315;

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub trials: usize,
    /// `max |S(w, h^)| / (|w|_E |h^|_E)`, energy norms `K + M + B`.
    pub max_orthogonality_defect: f64,
    /// `max |hT S_bb h - Q(h^, h^)| / max(|hT S_bb h|, hT B h)`.
    pub max_galerkin_defect: f64,
    /// `max |S(u + c w0) - S(u) - 2c int phi u^2| / (|S(u)| + |c| int phi u^2)`;
    /// `None` without a kernel.
    pub max_linearity_defect: Option<f64>,
    /// `S(u + c w0, u + c w0)` for `c = -(S(u, u) + 1) / (2 int phi u^2)`.
    pub negative_value: Option<f64>,
    pub kernel_dim: usize,
}

fn energy(op: &DiscreteOperator, u: &[f64]) -> f64 {
    (op.k.form(u, u) + op.m.form(u, u) + op.b.form(u, u)).sqrt()
}

fn scatter(op: &DiscreteOperator, dtn: &DtNMap, h: &DVector<f64>) -> Vec<f64> {
    let mut full = vec![0.0; op.n_dofs()];
    for (&d, &v) in dtn.boundary_dofs.iter().zip(h.iter()) {
        full[d] = v;
    }
    full
}

/// Extension of deflated boundary data whose conormal derivative is
/// `B`-orthogonal to the kernel traces.
pub fn orthogonal_extension(op: &DiscreteOperator, dtn: &DtNMap, h: &[f64]) -> Result<Vec<f64>> {
    let mut ext = dtn.extend(op, h)?;
    let kernel = dtn.kernel_vectors(op);
    let kd = dtn.kernel_dim;
    if kd == 0 {
        return Ok(ext);
    }
    let t = &dtn.kernel_boundary_traces;
    let g = t.transpose() * &dtn.b_bb * t;
    // The snapped correction touches interior rows only, so the boundary
    // rows of A' ext are those of A ext.
    let residual = |ext: &[f64]| -> DVector<f64> {
        let a_ext = op.q_matrix().matvec(ext);
        DVector::from_iterator(
            dtn.boundary_dim(),
            dtn.boundary_dofs.iter().map(|&d| a_ext[d]),
        )
    };
    let rhs = -(t.transpose() * residual(&ext));
    let c = g
        .lu()
        .solve(&rhs)
        .ok_or_else(|| FbmsError::solver("singular Gram matrix of kernel traces"))?;
    for (ci, w) in c.iter().zip(&kernel) {
        ext.iter_mut().zip(w).for_each(|(e, wi)| *e += ci * wi);
    }
    Ok(ext)
}

/// Run `trials` randomized checks (seeded, deterministic).
pub fn decomposition_check(
    op: &DiscreteOperator,
    dtn: &DtNMap,
    trials: usize,
) -> Result<DecompositionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let z = &dtn.deflated_basis;
    let kernel = dtn.kernel_vectors(op);
    let interior = op.grid.interior();
    let mut report = DecompositionReport {
        trials,
        max_orthogonality_defect: 0.0,
        max_galerkin_defect: 0.0,
        max_linearity_defect: None,
        negative_value: None,
        kernel_dim: dtn.kernel_dim,
    };
    for _ in 0..trials {
        let r = DVector::from_fn(z.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let h: Vec<f64> = (z * r).iter().copied().collect();
        report.max_galerkin_defect = report.max_galerkin_defect.max(dtn.galerkin_defect(op, &h)?);
        let ext = orthogonal_extension(op, dtn, &h)?;

        // w: random interior values, boundary values in the span of the traces.
        let coef = DVector::from_fn(dtn.kernel_dim, |_, _| rng.gen_range(-1.0..1.0));
        let b = &dtn.kernel_boundary_traces * coef;
        let mut w = scatter(op, dtn, &b);
        for x in &mut w[interior.clone()] {
            *x = rng.gen_range(-1.0..1.0);
        }
        let s = dtn.snapped_s(op, &w, &ext)?;
        let scale = energy(op, &w) * energy(op, &ext);
        report.max_orthogonality_defect = report.max_orthogonality_defect.max(s.abs() / scale);
    }
    if let Some(w0) = kernel.first().filter(|_| dtn.kernel_dim > 0) {
        let trace: Vec<f64> = dtn
            .kernel_boundary_traces
            .column(0)
            .iter()
            .copied()
            .collect();
        // u: the extension of the trace plus a small random interior
        // perturbation. Smooth u keeps S(u) and c of order one, so the
        // check is not swamped by cancellation in S(u + c w0).
        let smooth = dtn.extend(op, &trace)?;
        let amp = 0.1 * smooth.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let perturbed = |rng: &mut ChaCha8Rng| {
            let mut u = smooth.clone();
            for x in &mut u[interior.clone()] {
                *x += amp * rng.gen_range(-1.0..1.0);
            }
            u
        };
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let u = perturbed(&mut rng);
            let c = rng.gen_range(-3.0..3.0);
            let (lhs, base, bnd) = linear_in_c(op, dtn, &u, w0, c)?;
            worst = worst.max((lhs - base - 2.0 * c * bnd).abs() / (base.abs() + c.abs() * bnd));
        }
        report.max_linearity_defect = Some(worst);
        let u = perturbed(&mut rng);
        let base = dtn.snapped_s(op, &u, &u)?;
        let bnd = op.b.form(&u, &u);
        let c = -(base + 1.0) / (2.0 * bnd);
        report.negative_value = Some(linear_in_c(op, dtn, &u, w0, c)?.0);
    }
    Ok(report)
}

/// `(S(u + c w0), S(u), int_bdry phi u^2)` for the snapped form.
fn linear_in_c(
    op: &DiscreteOperator,
    dtn: &DtNMap,
    u: &[f64],
    w0: &[f64],
    c: f64,
) -> Result<(f64, f64, f64)> {
    let shifted: Vec<f64> = u.iter().zip(w0).map(|(a, b)| a + c * b).collect();
    Ok((
        dtn.snapped_s(op, &shifted, &shifted)?,
        dtn.snapped_s(op, u, u)?,
        op.b.form(u, u),
    ))
}

/// Gram matrix `T^T B T` of the kernel traces.
pub fn trace_gram(dtn: &DtNMap) -> DMatrix<f64> {
    let t = &dtn.kernel_boundary_traces;
    t.transpose() * &dtn.b_bb * t
}
