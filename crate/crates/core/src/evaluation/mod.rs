//! Calinski-Harabasz, Davies-Bouldin and movement pattern-based validity indices.

mod indices;
mod sweep;

pub use indices::{bcss, ch_index, db_index, mpbi, wcss, BcssVariant, ChVariant};
pub use sweep::{evaluate, sweep_k, EvalInputs, IndexSet, SweepAlgorithm, SweepRow, SweepTable, ValidityReport};
