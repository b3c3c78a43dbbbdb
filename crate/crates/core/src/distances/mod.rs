//! Euclidean, Levenshtein, DTW and movement-pattern distances, and matrices over collections.

mod matrix;
mod scalar;

pub use matrix::{
    distance_matrix, normalize_matrix, pair_distance, DistanceMatrix, MetricKind, MetricParams, MetricSpec,
    Normalization, SeriesView,
};
pub use scalar::{dtw, euclidean, levenshtein, mpbd, normalized_levenshtein, step_cost, DeltaSequence, DEFAULT_OMEGA};
