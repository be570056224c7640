//! Index and nullity certificates from fixed-boundary and Jacobi-Steklov
//! spectra.
//!
//! The Morse index of the form `S` equals `dim J0- + dim J0^0 + #{delta < alpha}`
//! and its nullity equals `dim J0^0 + dim E_alpha`. A certificate records the
//! four counted dimensions together with the cuts used to count them.

use serde::{Deserialize, Serialize};

pub mod decomposition;
pub mod pipeline;
pub mod sandwich;

pub use decomposition::{decomposition_check, DecompositionReport};
pub use pipeline::{index_2d, index_2d_operator, Index2d};
pub use sandwich::{certify_sandwich, unit_sphere_curvature, SandwichBounds};

use crate::error::{FbmsError, Result};
use crate::report::{SpectrumKind, SpectrumReport, SCHEMA_VERSION};
use crate::tolerance::{CutTolerances, ToleranceProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexCounts {
    pub fixed_negative: usize,
    pub fixed_null: usize,
    pub dtn_below: usize,
    pub dtn_at: usize,
}

impl IndexCounts {
    pub fn index(&self) -> usize {
        self.fixed_negative + self.fixed_null + self.dtn_below
    }

    pub fn nullity(&self) -> usize {
        self.fixed_null + self.dtn_at
    }

    pub fn as_tuple(&self) -> (usize, usize, usize, usize) {
        (
            self.fixed_negative,
            self.fixed_null,
            self.dtn_below,
            self.dtn_at,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexCertificate {
    pub alpha: f64,
    pub counts: IndexCounts,
    pub index: usize,
    pub nullity: usize,
    pub method: String,
    pub cuts: CutTolerances,
    pub tolerances: ToleranceProfile,
    pub warnings: Vec<String>,
}

impl IndexCertificate {
    pub fn from_counts(
        counts: IndexCounts,
        alpha: f64,
        method: impl Into<String>,
        cuts: CutTolerances,
        tolerances: ToleranceProfile,
    ) -> Self {
        IndexCertificate {
            alpha,
            counts,
            index: counts.index(),
            nullity: counts.nullity(),
            method: method.into(),
            cuts,
            tolerances,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            schema: SCHEMA_VERSION,
            alpha: self.alpha,
            counts: self.counts,
            index: self.index,
            nullity: self.nullity,
            method: self.method.clone(),
            cuts: self.cuts,
            tolerances: self.tolerances.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub schema: u32,
    pub alpha: f64,
    pub counts: IndexCounts,
    pub index: usize,
    pub nullity: usize,
    pub method: String,
    pub cuts: CutTolerances,
    pub tolerances: ToleranceProfile,
    pub warnings: Vec<String>,
}

/// `true` when `distance` lies within `factor` of the band edge `band`
/// on either side.
fn near_cut(distance: f64, band: f64, factor: f64) -> bool {
    distance > band / factor && distance < band * factor
}

/// Count the fixed-boundary and Jacobi-Steklov spectra against their cuts.
///
/// Fixed eigenvalues with `|lambda| <= null_tol` are kernel elements and
/// count toward the index; Jacobi-Steklov eigenvalues with
/// `|delta - alpha| <= cluster_tol` count toward the nullity only.
pub fn certify(
    fixed: &SpectrumReport,
    dtn: &SpectrumReport,
    alpha: f64,
    tol: &ToleranceProfile,
) -> Result<IndexCertificate> {
    if fixed.kind != SpectrumKind::FixedBoundary {
        return Err(FbmsError::validation(
            "first report must be a fixed-boundary spectrum",
        ));
    }
    if dtn.kind != SpectrumKind::JacobiSteklov {
        return Err(FbmsError::validation(
            "second report must be a Jacobi-Steklov spectrum",
        ));
    }
    if fixed.cuts != dtn.cuts {
        return Err(FbmsError::validation(format!(
            "inconsistent tolerance profiles: fixed {:?} vs dtn {:?}",
            fixed.cuts, dtn.cuts
        )));
    }
    let cuts = fixed.cuts;
    let counts = IndexCounts {
        fixed_negative: fixed.count_below(-cuts.null_tol),
        fixed_null: fixed.count_within(0.0, cuts.null_tol),
        dtn_below: dtn.count_below(alpha - cuts.cluster_tol),
        dtn_at: dtn.count_within(alpha, cuts.cluster_tol),
    };

    let mut warnings = Vec::new();
    let mut strict_hits = Vec::new();
    for &l in &fixed.eigenvalues {
        if near_cut(l.abs(), cuts.null_tol, tol.borderline_factor) {
            warnings.push(format!(
                "fixed eigenvalue {l:.6e} within {}x of the null band {:.1e}",
                tol.borderline_factor, cuts.null_tol
            ));
        }
        if near_cut(l.abs(), cuts.null_tol, tol.strict_factor) {
            strict_hits.push(format!("fixed eigenvalue {l:.6e}"));
        }
    }
    for &d in &dtn.eigenvalues {
        let dist = (d - alpha).abs();
        if near_cut(dist, cuts.cluster_tol, tol.borderline_factor) {
            warnings.push(format!(
                "Jacobi-Steklov eigenvalue {d:.6e} within {}x of the band around alpha = {alpha}",
                tol.borderline_factor
            ));
        }
        if near_cut(dist, cuts.cluster_tol, tol.strict_factor) {
            strict_hits.push(format!("Jacobi-Steklov eigenvalue {d:.6e}"));
        }
    }
    if tol.strict && !strict_hits.is_empty() {
        return Err(FbmsError::Borderline(strict_hits.join("; ")));
    }
    warnings.extend(fixed.warnings.iter().cloned());
    warnings.extend(dtn.warnings.iter().cloned());

    let method = if fixed.method == dtn.method {
        fixed.method.clone()
    } else {
        format!("{}+{}", fixed.method, dtn.method)
    };
    let mut cert = IndexCertificate::from_counts(counts, alpha, method, cuts, tol.clone());
    cert.warnings = warnings;
    Ok(cert)
}
