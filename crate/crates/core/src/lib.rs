//! Clustering of fixed-length time series by how they move.
//!
//! The crate covers the whole path from raw long-format observations to
//! cluster assignments and validity scores:
//!
//! * [`data`]: ingestion, alignment, gap filling, min-max scaling, five-level
//!   symbolic discretization and outlier removal.
//! * [`distances`]: Euclidean, Levenshtein, DTW and the movement
//!   pattern-based distance (MPBD), plus parallel distance matrices.
//! * [`clustering`]: k-means, k-medoids and agglomerative clustering.
//! * [`evaluation`]: Calinski-Harabasz, Davies-Bouldin and the movement
//!   pattern-based index (MPBI), and k sweeps.
//! * [`image`]: rasterized-series features for image-style clustering.
//! * [`io`]: the CSV/JSON artifact formats.

pub mod clustering;
pub mod data;
pub mod distances;
pub mod error;
pub mod evaluation;
pub mod image;
pub mod io;

pub use error::{ClusterError, DataError, DistanceError, EvalError, FeatureError, FormatError};
