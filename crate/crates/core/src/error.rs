//! Error types for every stage of the pipeline.

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while ingesting and preparing series.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("column `{column}` not found in header of {path}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("duplicate observation for series `{series_id}` on {date} (line {line})")]
    DuplicateKey {
        series_id: String,
        date: chrono::NaiveDate,
        line: u64,
    },
    #[error("bad header in {path}: {message}")]
    Header { path: PathBuf, message: String },
    #[error("no observations to assemble")]
    Empty,
    #[error("invalid date range: start {start} is after end {end}")]
    DateRange {
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
    },
    #[error("series `{0}` has no present values")]
    AllMissing(String),
    #[error("series `{id}` value {value} at position {position} is outside [0, 1]; was scaling skipped?")]
    OutOfRange { id: String, position: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least 2 series, got {0}")]
    TooFewSeries(usize),
    #[error("series `{0}` is incomplete (contains missing values)")]
    Incomplete(String),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Errors raised by distance functions and matrix construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("series too short: need at least {min} values, got {len}")]
    TooShort { len: usize, min: usize },
    #[error("DTW window {window} is smaller than the length difference {diff}")]
    WindowTooSmall { window: usize, diff: usize },
    #[error("metric `{metric}` requires a {required} representation")]
    Representation {
        metric: &'static str,
        required: &'static str,
    },
    #[error("need at least 2 series for a distance matrix, got {0}")]
    TooFewSeries(usize),
    #[error("matrix is already normalized ({0})")]
    AlreadyNormalized(&'static str),
    #[error("malformed distance matrix: {0}")]
    Malformed(String),
}

/// Errors raised by the clustering algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} is out of range for {n} items (need {min} <= k <= n)")]
    InvalidK { k: usize, n: usize, min: usize },
    #[error("input vectors have inconsistent lengths")]
    Ragged,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("ids and data disagree in length ({ids} ids, {rows} rows)")]
    IdMismatch { ids: usize, rows: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
}

/// Errors raised by the cluster-validity indices.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("labels cover {labels} items but {rows} vectors were supplied")]
    SizeMismatch { labels: usize, rows: usize },
    #[error("k = {k} is out of range for {n} items")]
    InvalidK { k: usize, n: usize },
    #[error("label {label} is outside 1..={k}")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

impl EvalError {
    /// True for conditions that signal degenerate geometry rather than bad input.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, EvalError::Degenerate(_))
    }
}

/// Errors raised by the image-feature branch.
#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("grid dimensions must be at least 2x2, got {width}x{height}")]
    GridTooSmall { width: usize, height: usize },
    #[error("block {block} does not divide the {width}x{height} grid")]
    BlockSize { block: usize, width: usize, height: usize },
    #[error("series `{0}` is empty or incomplete")]
    BadSeries(String),
    #[error("feature vectors disagree: {0}")]
    Inconsistent(String),
    #[error("line {line}: expected {expected} features, found {found}")]
    Ragged { line: u64, expected: usize, found: usize },
    #[error("line {line}: non-numeric feature `{cell}`")]
    NonNumeric { line: u64, cell: String },
    #[error("unknown series ids: {}", .0.join(", "))]
    UnknownIds(Vec<String>),
    #[error("feature file {0} has no header")]
    NoHeader(PathBuf),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Errors raised while reading or writing artifact files.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}
