//! Five-level symbolic discretization of scaled series.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::series::{SeriesCollection, TimeSeries};
use crate::error::DataError;

/// Symbol letters for levels 1..=5.
pub const ALPHABET: [char; 5] = ['A', 'B', 'C', 'D', 'E'];

/// Upper-exclusive cut points between consecutive levels.
///
/// A value `x` gets level `1 + #{c in cuts : c <= x}`, so each cut belongs
/// to the level above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds(pub [f64; 4]);

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds([0.29, 0.47, 0.65, 0.83])
    }
}

impl Thresholds {
    pub fn new(cuts: [f64; 4]) -> Result<Self, DataError> {
        let increasing = cuts.windows(2).all(|w| w[0] < w[1]);
        if !increasing || cuts.iter().any(|c| !c.is_finite()) {
            return Err(DataError::InvalidParameter(format!(
                "discretization thresholds must be finite and strictly increasing, got {cuts:?}"
            )));
        }
        Ok(Thresholds(cuts))
    }

    /// Level in 1..=5 for a scaled value.
    pub fn level(&self, x: f64) -> u8 {
        1 + self.0.iter().filter(|&&c| c <= x).count() as u8
    }
}

/// A series discretized into levels 1..=5 (A..=E).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicSeries {
    pub id: String,
    pub levels: Vec<u8>,
}

impl SymbolicSeries {
    /// Parses a string over `A..=E`.
    pub fn from_letters(id: impl Into<String>, letters: &str) -> Result<Self, DataError> {
        let levels = letters
            .chars()
            .map(|c| {
                ALPHABET
                    .iter()
                    .position(|&a| a == c)
                    .map(|p| p as u8 + 1)
                    .ok_or_else(|| DataError::InvalidParameter(format!("`{c}` is not a symbol in A..=E")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { id: id.into(), levels })
    }

    pub fn letters(&self) -> String {
        self.levels.iter().map(|&l| ALPHABET[l as usize - 1]).collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl AsRef<[u8]> for SymbolicSeries {
    fn as_ref(&self) -> &[u8] {
        &self.levels
    }
}

impl fmt::Display for SymbolicSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.letters())
    }
}

/// Maps each scaled value to its symbol level.
///
/// Values outside `[0, 1]` (or NaN) mean scaling was skipped and are rejected.
pub fn discretize(series: &TimeSeries, thresholds: &Thresholds) -> Result<SymbolicSeries, DataError> {
    let levels = series
        .values
        .iter()
        .enumerate()
        .map(|(position, &value)| {
            if (0.0..=1.0).contains(&value) {
                Ok(thresholds.level(value))
            } else {
                Err(DataError::OutOfRange {
                    id: series.id.clone(),
                    position,
                    value,
                })
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(SymbolicSeries {
        id: series.id.clone(),
        levels,
    })
}

pub fn discretize_collection(
    collection: &SeriesCollection,
    thresholds: &Thresholds,
) -> Result<Vec<SymbolicSeries>, DataError> {
    collection.series.iter().map(|s| discretize(s, thresholds)).collect()
}
