//! Validity reports for one assignment and sweeps over a range of k.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::indices::{ch_index, db_index, mpbi, ChVariant};
use crate::clustering::{
    agglomerative, cut_dendrogram, kmeans, kmedoids, ClusterAssignment, KMeansConfig, KMedoidsConfig, Linkage,
};
use crate::data::SymbolicSeries;
use crate::distances::DistanceMatrix;
use crate::error::{ClusterError, EvalError};

/// Scores for one assignment. An index that could not be computed is `None`
/// and the reason is listed in `notes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub k: usize,
    pub ch: Option<f64>,
    pub ch_variant: ChVariant,
    pub db: Option<f64>,
    pub mpbi: Option<f64>,
    pub metric: Option<String>,
    pub normalization: Option<String>,
    pub notes: Vec<String>,
}

impl ValidityReport {
    /// True when any index failed because of degenerate geometry.
    pub fn has_degenerate(&self) -> bool {
        self.notes.iter().any(|n| n.contains("degenerate"))
    }
}

/// Inputs the indices are computed on.
#[derive(Debug, Clone, Copy)]
pub struct EvalInputs<'a> {
    /// Scaled numeric vectors for CH and DB.
    pub vectors: Option<&'a [Vec<f64>]>,
    /// Symbol series for MPBI.
    pub symbolic: Option<&'a [SymbolicSeries]>,
    pub omega: f64,
    pub ch_variant: ChVariant,
}

/// Which indices a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSet {
    pub ch: bool,
    pub db: bool,
    pub mpbi: bool,
}

impl Default for IndexSet {
    fn default() -> Self {
        Self {
            ch: true,
            db: true,
            mpbi: true,
        }
    }
}

fn record(notes: &mut Vec<String>, name: &str, result: Result<f64, EvalError>) -> Option<f64> {
    match result {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{name}: {e}"));
            None
        }
    }
}

/// Computes every requested index, collecting failures as notes.
pub fn evaluate(assignment: &ClusterAssignment, inputs: &EvalInputs<'_>, indices: IndexSet) -> ValidityReport {
    let mut notes = Vec::new();
    let ch = match (indices.ch, inputs.vectors) {
        (true, Some(v)) => record(&mut notes, "ch", ch_index(v, assignment, inputs.ch_variant)),
        (true, None) => {
            notes.push("ch: numeric vectors unavailable".into());
            None
        }
        _ => None,
    };
    let db = match (indices.db, inputs.vectors) {
        (true, Some(v)) => record(&mut notes, "db", db_index(v, assignment)),
        (true, None) => {
            notes.push("db: numeric vectors unavailable".into());
            None
        }
        _ => None,
    };
    let mpbi = match (indices.mpbi, inputs.symbolic) {
        (true, Some(s)) => record(&mut notes, "mpbi", mpbi(s, assignment, inputs.omega)),
        (true, None) => {
            notes.push("mpbi: symbolic series unavailable".into());
            None
        }
        _ => None,
    };
    ValidityReport {
        k: assignment.k,
        ch,
        ch_variant: inputs.ch_variant,
        db,
        mpbi,
        metric: None,
        normalization: None,
        notes,
    }
}

/// The clustering run at every k of a sweep.
#[derive(Debug, Clone, Copy)]
pub enum SweepAlgorithm<'a> {
    KMeans {
        ids: &'a [String],
        vectors: &'a [Vec<f64>],
        seed: u64,
    },
    KMedoids {
        matrix: &'a DistanceMatrix,
        seed: u64,
    },
    Hierarchical {
        matrix: &'a DistanceMatrix,
        linkage: Linkage,
    },
}

impl SweepAlgorithm<'_> {
    fn len(&self) -> usize {
        match self {
            SweepAlgorithm::KMeans { ids, .. } => ids.len(),
            SweepAlgorithm::KMedoids { matrix, .. } | SweepAlgorithm::Hierarchical { matrix, .. } => matrix.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub ch: Option<f64>,
    pub db: Option<f64>,
    pub mpbi: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

fn row_from(k: usize, result: Result<ValidityReport, ClusterError>) -> SweepRow {
    match result {
        Ok(r) => SweepRow {
            k,
            ch: r.ch,
            db: r.db,
            mpbi: r.mpbi,
            note: (!r.notes.is_empty()).then(|| r.notes.join("; ")),
        },
        Err(e) => SweepRow {
            k,
            ch: None,
            db: None,
            mpbi: None,
            note: Some(e.to_string()),
        },
    }
}

/// Clusters at every k in `k_min..=k_max` and scores each result.
///
/// Hierarchical sweeps build one dendrogram and cut it repeatedly;
/// partitioning algorithms run independently per k, in parallel, with the
/// same seed. Per-k failures become row notes.
pub fn sweep_k(
    algorithm: &SweepAlgorithm<'_>,
    k_min: usize,
    k_max: usize,
    inputs: &EvalInputs<'_>,
    indices: IndexSet,
) -> Result<SweepTable, EvalError> {
    let n = algorithm.len();
    if k_min < 2 || k_max < k_min || k_max + 1 > n {
        return Err(EvalError::InvalidK { k: k_max.max(k_min), n });
    }
    let ks: Vec<usize> = (k_min..=k_max).collect();
    let score = |a: ClusterAssignment| evaluate(&a, inputs, indices);
    let rows = match algorithm {
        SweepAlgorithm::Hierarchical { matrix, linkage } => {
            let dendrogram = agglomerative(matrix, *linkage)?;
            ks.par_iter()
                .map(|&k| row_from(k, cut_dendrogram(&dendrogram, k).map(score)))
                .collect()
        }
        SweepAlgorithm::KMeans { ids, vectors, seed } => ks
            .par_iter()
            .map(|&k| {
                row_from(
                    k,
                    kmeans(ids, vectors, &KMeansConfig::new(k, *seed)).map(|f| score(f.assignment)),
                )
            })
            .collect(),
        SweepAlgorithm::KMedoids { matrix, seed } => ks
            .par_iter()
            .map(|&k| {
                row_from(
                    k,
                    kmedoids(matrix, &KMedoidsConfig::new(k, *seed)).map(|f| score(f.assignment)),
                )
            })
            .collect(),
    };
    Ok(SweepTable { rows })
}
