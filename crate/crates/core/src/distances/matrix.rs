//! Dense symmetric distance matrices built in parallel.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scalar::{self, DEFAULT_OMEGA};
use crate::data::{SymbolicSeries, TimeSeries};
use crate::error::DistanceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    Levenshtein,
    Dtw,
    Mpbd,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Levenshtein => "levenshtein",
            MetricKind::Dtw => "dtw",
            MetricKind::Mpbd => "mpbd",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(MetricKind::Euclidean),
            "levenshtein" => Ok(MetricKind::Levenshtein),
            "dtw" => Ok(MetricKind::Dtw),
            "mpbd" => Ok(MetricKind::Mpbd),
            other => Err(format!(
                "unknown metric `{other}` (expected euclidean, levenshtein, dtw or mpbd)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    MatrixMax,
    Table1,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::MatrixMax => "matrix_max",
            Normalization::Table1 => "table1",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Normalization {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Normalization::None),
            "matrix_max" => Ok(Normalization::MatrixMax),
            "table1" => Ok(Normalization::Table1),
            other => Err(format!(
                "unknown normalization `{other}` (expected none, matrix_max or table1)"
            )),
        }
    }
}

/// Parameters shared by the metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub omega: f64,
    pub dtw_window: Option<usize>,
    /// Scale bounds of the numeric input; used by `table1` Euclidean normalization.
    pub scale_lo: f64,
    pub scale_hi: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            omega: DEFAULT_OMEGA,
            dtw_window: None,
            scale_lo: 0.1,
            scale_hi: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub params: MetricParams,
}

impl MetricSpec {
    pub fn new(kind: MetricKind) -> Self {
        Self {
            kind,
            params: MetricParams::default(),
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.params.omega = omega;
        self
    }

    pub fn with_window(mut self, window: Option<usize>) -> Self {
        self.params.dtw_window = window;
        self
    }

    /// Whether the metric can run on symbol levels / numeric values.
    pub fn accepts_symbolic(&self) -> bool {
        matches!(self.kind, MetricKind::Levenshtein | MetricKind::Mpbd)
    }

    pub fn accepts_numeric(&self) -> bool {
        !matches!(self.kind, MetricKind::Levenshtein)
    }
}

/// Borrowed input to matrix construction.
#[derive(Debug, Clone, Copy)]
pub enum SeriesView<'a> {
    Numeric(&'a [TimeSeries]),
    Symbolic(&'a [SymbolicSeries]),
}

impl SeriesView<'_> {
    pub fn len(&self) -> usize {
        match self {
            SeriesView::Numeric(s) => s.len(),
            SeriesView::Symbolic(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ids(&self) -> Vec<String> {
        match self {
            SeriesView::Numeric(s) => s.iter().map(|x| x.id.clone()).collect(),
            SeriesView::Symbolic(s) => s.iter().map(|x| x.id.clone()).collect(),
        }
    }

    fn lengths(&self) -> Vec<usize> {
        match self {
            SeriesView::Numeric(s) => s.iter().map(TimeSeries::len).collect(),
            SeriesView::Symbolic(s) => s.iter().map(SymbolicSeries::len).collect(),
        }
    }

    fn is_symbolic(&self) -> bool {
        matches!(self, SeriesView::Symbolic(_))
    }
}

/// Applies one metric to the `i`-th and `j`-th members of a view.
pub fn pair_distance(view: SeriesView<'_>, i: usize, j: usize, spec: &MetricSpec) -> Result<f64, DistanceError> {
    let p = &spec.params;
    match (spec.kind, view) {
        (MetricKind::Euclidean, SeriesView::Numeric(s)) => scalar::euclidean(&s[i].values, &s[j].values),
        (MetricKind::Dtw, SeriesView::Numeric(s)) => scalar::dtw(&s[i].values, &s[j].values, p.dtw_window),
        (MetricKind::Mpbd, SeriesView::Numeric(s)) => scalar::mpbd(&s[i].values, &s[j].values, p.omega),
        (MetricKind::Mpbd, SeriesView::Symbolic(s)) => scalar::mpbd(&s[i].levels, &s[j].levels, p.omega),
        (MetricKind::Levenshtein, SeriesView::Symbolic(s)) => {
            Ok(scalar::levenshtein(&s[i].levels, &s[j].levels) as f64)
        }
        (kind, _) => Err(DistanceError::Representation {
            metric: kind.name(),
            required: if kind == MetricKind::Levenshtein {
                "symbolic"
            } else {
                "numeric"
            },
        }),
    }
}

/// Symmetric pairwise distances with provenance.
///
/// Stored dense and row-major with the full mirror.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    data: Vec<f64>,
    pub metric: MetricKind,
    pub normalization: Normalization,
    pub params: MetricParams,
    /// True when computed on symbol levels.
    pub symbolic: bool,
    /// Source series lengths, one per id.
    pub lengths: Vec<usize>,
}

impl DistanceMatrix {
    /// Builds a matrix from a full row-major buffer, validating symmetry and the diagonal.
    pub fn from_parts(
        ids: Vec<String>,
        data: Vec<f64>,
        metric: MetricKind,
        normalization: Normalization,
        params: MetricParams,
    ) -> Result<Self, DistanceError> {
        let n = ids.len();
        if data.len() != n * n {
            return Err(DistanceError::Malformed(format!("{} entries for {n} ids", data.len())));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(DistanceError::Malformed(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let v = data[i * n + j];
                if v != data[j * n + i] || !(v >= 0.0) || !v.is_finite() {
                    return Err(DistanceError::Malformed(format!(
                        "entry ({i}, {j}) is asymmetric, negative or non-finite"
                    )));
                }
            }
        }
        Ok(Self {
            ids,
            data,
            metric,
            normalization,
            params,
            symbolic: false,
            lengths: vec![0; n],
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// Restricts to the given positions, in that order.
    pub fn subset(&self, positions: &[usize]) -> DistanceMatrix {
        let data = positions
            .iter()
            .flat_map(|&i| positions.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        DistanceMatrix {
            ids: positions.iter().map(|&i| self.ids[i].clone()).collect(),
            data,
            lengths: positions.iter().map(|&i| self.lengths[i]).collect(),
            ..self.clone()
        }
    }
}

/// Computes all `n(n-1)/2` unordered pairs once, in parallel over rows.
///
/// Each cell is produced by exactly one task, so the result does not depend
/// on the thread count.
pub fn distance_matrix(view: SeriesView<'_>, spec: &MetricSpec) -> Result<DistanceMatrix, DistanceError> {
    let n = view.len();
    if n < 2 {
        return Err(DistanceError::TooFewSeries(n));
    }
    if view.is_symbolic() && !spec.accepts_symbolic() {
        return Err(DistanceError::Representation {
            metric: spec.kind.name(),
            required: "numeric",
        });
    }
    if !view.is_symbolic() && !spec.accepts_numeric() {
        return Err(DistanceError::Representation {
            metric: spec.kind.name(),
            required: "symbolic",
        });
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| pair_distance(view, i, j, spec))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut data = vec![0.0; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + 1 + offset;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(DistanceMatrix {
        ids: view.ids(),
        data,
        metric: spec.kind,
        normalization: Normalization::None,
        params: spec.params,
        symbolic: view.is_symbolic(),
        lengths: view.lengths(),
    })
}

/// Rescales a raw matrix.
///
/// `matrix_max` divides by the largest entry. `table1` uses a per-metric
/// denominator: `omega * n` for MPBD, the longer length for Levenshtein,
/// `sqrt(n) * (hi - lo)` for Euclidean, and the matrix maximum for DTW.
/// A zero denominator leaves the entries unchanged.
pub fn normalize_matrix(matrix: &DistanceMatrix, mode: Normalization) -> Result<DistanceMatrix, DistanceError> {
    if matrix.normalization != Normalization::None {
        if matrix.normalization == mode {
            return Ok(matrix.clone());
        }
        return Err(DistanceError::AlreadyNormalized(matrix.normalization.name()));
    }
    let mut out = matrix.clone();
    out.normalization = mode;
    let n = matrix.len();
    let scale_all = |out: &mut DistanceMatrix, denom: f64| {
        if denom > 0.0 {
            out.data.iter_mut().for_each(|v| *v /= denom);
        }
    };
    match (mode, matrix.metric) {
        (Normalization::None, _) => {}
        (Normalization::MatrixMax, _) | (Normalization::Table1, MetricKind::Dtw) => scale_all(&mut out, matrix.max()),
        (Normalization::Table1, kind) => {
            let p = &matrix.params;
            for i in 0..n {
                for j in 0..n {
                    let len = matrix.lengths[i].max(matrix.lengths[j]) as f64;
                    let denom = match kind {
                        MetricKind::Mpbd => p.omega * len,
                        MetricKind::Levenshtein => len,
                        MetricKind::Euclidean => len.sqrt() * (p.scale_hi - p.scale_lo),
                        MetricKind::Dtw => unreachable!(),
                    };
                    if denom > 0.0 {
                        out.data[i * n + j] /= denom;
                    }
                }
            }
        }
    }
    Ok(out)
}
