//! Sorted spectra with multiplicity clusters and mode labels.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tolerance::CutTolerances;

/// Output schema version embedded in every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Fourier mode `n` and parity in `t` of a separated eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeLabel {
    pub n: u32,
    pub parity: Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// `J u = -lambda u`, `u = 0` on the boundary.
    FixedBoundary,
    /// Jacobi-Steklov eigenvalues of the deflated Dirichlet-to-Neumann map.
    JacobiSteklov,
    /// Steklov eigenvalues of the Laplacian.
    LaplaceSteklov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    pub labels: Vec<ModeLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub kind: SpectrumKind,
    pub method: String,
    pub cuts: CutTolerances,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// One entry per eigenvalue.
    pub labels: Vec<Option<ModeLabel>>,
    pub clusters: Vec<Cluster>,
    pub warnings: Vec<String>,
    /// Informational notices (deflations, solver choices); never affect counts.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl SpectrumReport {
    /// Sort `(value, label)` pairs and group them into clusters. Ties are
    /// broken by `n` and then parity so the ordering is deterministic.
    pub fn new(
        kind: SpectrumKind,
        method: impl Into<String>,
        cuts: CutTolerances,
        mut entries: Vec<(f64, Option<ModeLabel>)>,
    ) -> Self {
        entries.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.1.cmp(&b.1))
        });
        let clusters = group_clusters(&entries, cuts.cluster_tol);
        let (eigenvalues, labels) = entries.into_iter().unzip();
        SpectrumReport {
            kind,
            method: method.into(),
            cuts,
            eigenvalues,
            labels,
            clusters,
            warnings: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn unlabeled(
        kind: SpectrumKind,
        method: impl Into<String>,
        cuts: CutTolerances,
        values: impl IntoIterator<Item = f64>,
    ) -> Self {
        Self::new(
            kind,
            method,
            cuts,
            values.into_iter().map(|v| (v, None)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn count_below(&self, cut: f64) -> usize {
        self.eigenvalues.iter().filter(|&&v| v < cut).count()
    }

    pub fn count_within(&self, center: f64, band: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&v| (v - center).abs() <= band)
            .count()
    }

    pub fn to_json(&self) -> ReportJson {
        ReportJson {
            schema: SCHEMA_VERSION,
            kind: self.kind,
            method: self.method.clone(),
            cluster_tol: self.cuts.cluster_tol,
            null_tol: self.cuts.null_tol,
            entries: self
                .clusters
                .iter()
                .map(|c| EntryJson {
                    value: c.value,
                    multiplicity: c.multiplicity,
                    labels: c.labels.clone(),
                })
                .collect(),
            warnings: self.warnings.clone(),
            notes: self.notes.clone(),
        }
    }

    /// Lossy CSV projection: one row per cluster.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,multiplicity,labels\n");
        for c in &self.clusters {
            let labels: Vec<String> = c
                .labels
                .iter()
                .map(|l| format!("{}{}", l.n, l.parity))
                .collect();
            out.push_str(&format!(
                "{:.15e},{},{}\n",
                c.value,
                c.multiplicity,
                labels.join(" ")
            ));
        }
        out
    }
}

fn group_clusters(entries: &[(f64, Option<ModeLabel>)], tol: f64) -> Vec<Cluster> {
    let mut clusters: Vec<(Vec<f64>, Vec<ModeLabel>)> = Vec::new();
    for &(v, label) in entries {
        let joins = clusters.last().is_some_and(|(vals, _)| {
            let last = *vals.last().unwrap();
            (v - last).abs() <= tol * last.abs().max(1.0)
        });
        if !joins {
            clusters.push((Vec::new(), Vec::new()));
        }
        let (vals, labels) = clusters.last_mut().unwrap();
        vals.push(v);
        if let Some(l) = label {
            if !labels.contains(&l) {
                labels.push(l);
            }
        }
    }
    clusters
        .into_iter()
        .map(|(vals, labels)| Cluster {
            value: vals.iter().sum::<f64>() / vals.len() as f64,
            multiplicity: vals.len(),
            labels,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub value: f64,
    pub multiplicity: usize,
    pub labels: Vec<ModeLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema: u32,
    pub kind: SpectrumKind,
    pub method: String,
    pub cluster_tol: f64,
    pub null_tol: f64,
    pub entries: Vec<EntryJson>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
}

/// One row of a per-mode spectrum export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub n: u32,
    pub parity: Parity,
    pub delta: f64,
    pub multiplicity: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<String>,
}

/// Deterministic order: by delta, then n, then parity.
pub fn sort_mode_rows(rows: &mut [ModeRow]) {
    rows.sort_by(|a, b| {
        a.delta
            .partial_cmp(&b.delta)
            .unwrap_or(Ordering::Equal)
            .then(a.n.cmp(&b.n))
            .then(a.parity.cmp(&b.parity))
    });
}

pub fn mode_rows_csv(rows: &[ModeRow]) -> String {
    let with_method = rows.iter().any(|r| r.method.is_some());
    let mut out = String::from(if with_method {
        "n,parity,delta,multiplicity,method\n"
    } else {
        "n,parity,delta,multiplicity\n"
    });
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.15e},{}",
            r.n, r.parity, r.delta, r.multiplicity
        ));
        if with_method {
            out.push_str(&format!(",{}", r.method.as_deref().unwrap_or("")));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cuts() -> CutTolerances {
        CutTolerances {
            null_tol: 1e-6,
            cluster_tol: 1e-4,
        }
    }

    #[test]
    fn clusters_group_near_equal_values() {
        let r = SpectrumReport::unlabeled(
            SpectrumKind::JacobiSteklov,
            "test",
            cuts(),
            [1.0, -1.0, -1.00000001, 1.00002, 0.44],
        );
        assert_eq!(r.eigenvalues[0], -1.00000001);
        let mult: Vec<usize> = r.clusters.iter().map(|c| c.multiplicity).collect();
        assert_eq!(mult, vec![2, 1, 2]);
        assert_eq!(r.count_below(1.0 - 1e-4), 3);
        assert_eq!(r.count_within(1.0, 1e-4), 2);
    }

    proptest! {
        #[test]
        fn sorted_and_multiplicities_sum(values in proptest::collection::vec(-50.0f64..50.0, 0..40)) {
            let r = SpectrumReport::unlabeled(SpectrumKind::FixedBoundary, "p", cuts(), values.clone());
            prop_assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let total: usize = r.clusters.iter().map(|c| c.multiplicity).sum();
            prop_assert_eq!(total, values.len());
        }
    }
}
