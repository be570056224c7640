//! The 2D index pipeline: assemble, solve both spectra, count.

use crate::discrete::{assemble, CoefficientField, DiscreteOperator, Resolution};
use crate::error::Result;
use crate::geometry::SurfaceChart;
use crate::report::SpectrumReport;
use crate::spectral::{build_dtn, dtn_spectrum, fixed_spectrum_covering, DtNMap, FixedSpectrum};
use crate::tolerance::ToleranceProfile;

use super::{certify, IndexCertificate};

/// Smallest number of Jacobi-Steklov eigenvalues reported by the pipeline.
pub const MIN_DTN_REPORTED: usize = 6;

/// Everything the 2D pipeline computed for one operator.
#[derive(Debug, Clone)]
pub struct Index2d {
    pub fixed: FixedSpectrum,
    pub dtn: DtNMap,
    pub dtn_report: SpectrumReport,
    pub certificate: IndexCertificate,
}

/// Certificate of an assembled operator counted at `alpha` (the operator's
/// own boundary constant when `None`). The Jacobi-Steklov report extends
/// past the borderline zone above `alpha` so no counted or borderline value
/// is cut off.
pub fn index_2d_operator(
    op: &DiscreteOperator,
    alpha: Option<f64>,
    tol: &ToleranceProfile,
) -> Result<Index2d> {
    let res = op.grid.resolution;
    let cuts = tol.grid_2d_cuts(res.nt, res.ntheta);
    let fixed = fixed_spectrum_covering(op, MIN_DTN_REPORTED, cuts)?;
    let dtn = build_dtn(op, &fixed, tol)?;
    let alpha = alpha.unwrap_or(op.alpha());
    let reach = alpha + tol.borderline_factor * cuts.cluster_tol;
    let values = dtn.eigen()?.values;
    let needed = values.iter().filter(|&&d| d <= reach).count() + 2;
    let k = needed.max(MIN_DTN_REPORTED).min(values.len());
    let dtn_report = dtn_spectrum(op, &dtn, k)?;
    let certificate = certify(&fixed.report, &dtn_report, alpha, tol)?;
    Ok(Index2d {
        fixed,
        dtn,
        dtn_report,
        certificate,
    })
}

/// Assemble the index form of a free boundary minimal surface in the unit
/// ball and certify it.
pub fn index_2d(
    chart: &SurfaceChart,
    res: Resolution,
    alpha: Option<f64>,
    tol: &ToleranceProfile,
) -> Result<Index2d> {
    let op = assemble(chart, &CoefficientField::ball(), res, tol)?;
    index_2d_operator(&op, alpha, tol)
}
