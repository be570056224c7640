//! Index bounds when the boundary curvature of the ambient domain is not
//! constant.
//!
//! With `kappa = -h^{dOmega}(nu, nu)` on the boundary curve, `alpha_I = inf
//! kappa`, `alpha_S = sup kappa` and `phi` the harmonic extension of `kappa`,
//! the forms
//!
//! ```text
//! S_x(f, g) = int phi grad f grad g - alpha_x |h|^2 f g - alpha_x int_bdry phi f g
//! ```
//!
//! satisfy `S_I >= alpha_I S` and `S_S <= alpha_S S`, so the index of `S`
//! lies between the indices of `S_I` and `S_S`.

use std::sync::Arc;

use serde::Serialize;

use crate::discrete::{assemble, harmonic_extension, CoefficientField, Resolution, ScalarField};
use crate::error::{FbmsError, Result};
use crate::geometry::{BoundaryComponent, SurfaceChart};
use crate::tolerance::ToleranceProfile;

use super::pipeline::index_2d_operator;
use super::IndexCertificate;

/// The field `kappa = -h^{dOmega}(nu, nu)` sampled along the boundary.
pub type BoundaryCurvature = dyn Fn(BoundaryComponent, f64) -> f64 + Sync;

/// The unit sphere: `kappa = 1`.
pub fn unit_sphere_curvature(_: BoundaryComponent, _: f64) -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichBounds {
    pub alpha_inf: f64,
    pub alpha_sup: f64,
    /// Extremes of the discrete harmonic extension over all nodes.
    pub phi_range: (f64, f64),
    pub lower: IndexCertificate,
    pub upper: IndexCertificate,
}

/// Certify `S_I` and `S_S` on `chart` at `res`.
///
/// # Errors
/// A validation error when `alpha_I <= 0` (the domain is not strictly
/// convex along the boundary curve) and a solver error when the computed
/// bounds come out inverted.
pub fn certify_sandwich(
    chart: &SurfaceChart,
    curvature: &BoundaryCurvature,
    res: Resolution,
    tol: &ToleranceProfile,
) -> Result<SandwichBounds> {
    let (grid, phi) = harmonic_extension(chart, res, curvature, tol)?;
    let samples: Vec<f64> = grid.boundary_nodes().map(|(_, _, d)| phi[d]).collect();
    let alpha_inf = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha_sup = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(alpha_inf > 0.0) {
        return Err(FbmsError::validation(format!(
            "sandwich bounds need a strictly convex boundary along the curve: inf kappa = {alpha_inf:.3e} <= 0"
        )));
    }
    let phi_range = (
        phi.iter().copied().fold(f64::INFINITY, f64::min),
        phi.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let phi = Arc::new(phi);
    let certify_at = |alpha: f64| -> Result<IndexCertificate> {
        let coeffs = CoefficientField {
            phi: ScalarField::Nodal(phi.clone()),
            m: ScalarField::Scaled(alpha, Box::new(ScalarField::SecondFormSquared)),
            alpha,
        };
        let op = assemble(chart, &coeffs, res, tol)?;
        let mut cert = index_2d_operator(&op, None, tol)?.certificate;
        cert.method = format!("sandwich-{}", cert.method);
        Ok(cert)
    };
    let (lower, upper) = rayon::join(|| certify_at(alpha_inf), || certify_at(alpha_sup));
    let (mut lower, mut upper) = (lower?, upper?);
    lower.method.push_str("-inf");
    upper.method.push_str("-sup");
    if lower.index > upper.index {
        return Err(FbmsError::solver(format!(
            "sandwich bounds inverted: index(S_I) = {} > index(S_S) = {}",
            lower.index, upper.index
        )));
    }
    Ok(SandwichBounds {
        alpha_inf,
        alpha_sup,
        phi_range,
        lower,
        upper,
    })
}
