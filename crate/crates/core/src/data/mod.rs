//! Ingestion, alignment, preprocessing and discretization of raw observations.

mod ingest;
mod outliers;
mod prepare;
mod series;
mod symbolic;

pub use ingest::{load_long_csv, load_wide_csv, parse_date, CsvSchema, Loaded, RawObservation, Reject};
pub use outliers::{filter_outliers, nearest_neighbor_distances, percentile};
pub use prepare::{prepare, PrepareConfig, Prepared};
pub use series::{
    assemble_series, drop_sparse, fill_collection, fill_forward, fill_mean, minmax_scale, scale_collection, series_key,
    DateRange, FillStrategy, Mode, ProvenanceStep, SeriesCollection, SeriesMeta, TimeSeries,
};
pub use symbolic::{discretize, discretize_collection, SymbolicSeries, Thresholds, ALPHABET};
