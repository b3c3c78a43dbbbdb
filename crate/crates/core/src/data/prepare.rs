//! The fixed preprocessing chain from raw observations to scaled and symbolic series.

use std::collections::BTreeSet;

use super::ingest::RawObservation;
use super::outliers::filter_outliers;
use super::series::{
    assemble_series, drop_sparse, fill_collection, scale_collection, DateRange, FillStrategy, Mode, ProvenanceStep,
    SeriesCollection,
};
use super::symbolic::{discretize_collection, SymbolicSeries, Thresholds};
use crate::distances::{MetricKind, MetricSpec};
use crate::error::DataError;

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareConfig {
    pub mode: Mode,
    pub range: Option<DateRange>,
    pub max_missing_fraction: f64,
    /// `None` picks forward fill for prices and mean fill for sales.
    pub fill: Option<FillStrategy>,
    pub scale_lo: f64,
    pub scale_hi: f64,
    pub thresholds: Thresholds,
    /// Outlier metric and percentile; `None` skips the step.
    pub outliers: Option<(MetricSpec, f64)>,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Price,
            range: None,
            max_missing_fraction: 0.8,
            fill: None,
            scale_lo: 0.1,
            scale_hi: 1.0,
            thresholds: Thresholds::default(),
            outliers: Some((MetricSpec::new(MetricKind::Mpbd), 95.0)),
        }
    }
}

/// Output of [`prepare`]: the same surviving series in three representations.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    /// Filled but unscaled values, in the source units.
    pub original: SeriesCollection,
    pub scaled: SeriesCollection,
    pub symbolic: Vec<SymbolicSeries>,
    pub provenance: Vec<ProvenanceStep>,
}

/// Runs assemble, drop_sparse, fill, minmax_scale, discretize and filter_outliers in that order.
pub fn prepare(observations: &[RawObservation], config: &PrepareConfig) -> Result<Prepared, DataError> {
    let assembled = assemble_series(observations, config.mode, config.range)?;
    let dense = drop_sparse(&assembled, config.max_missing_fraction)?;
    let strategy = config.fill.unwrap_or(FillStrategy::for_mode(config.mode));
    let filled = fill_collection(&dense, strategy)?;
    let mut scaled = scale_collection(&filled, config.scale_lo, config.scale_hi)?;
    let mut symbolic = discretize_collection(&scaled, &config.thresholds)?;
    scaled
        .provenance
        .push(ProvenanceStep::new("discretize").param("thresholds", config.thresholds.0.to_vec()));

    if let Some((metric, pct)) = &config.outliers {
        let sym = metric.accepts_symbolic().then_some(symbolic.as_slice());
        scaled = filter_outliers(&scaled, sym, metric, *pct)?;
        let keep: BTreeSet<String> = scaled.series.iter().map(|s| s.id.clone()).collect();
        symbolic.retain(|s| keep.contains(&s.id));
    }

    let keep: BTreeSet<&str> = scaled.series.iter().map(|s| s.id.as_str()).collect();
    let mut original = filled.retain_ids(&keep);
    original.provenance = scaled.provenance.clone();
    Ok(Prepared {
        provenance: scaled.provenance.clone(),
        original,
        scaled,
        symbolic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ingest::parse_date;
    use chrono::Days;

    fn observations() -> Vec<RawObservation> {
        let start = parse_date("2021-01-01").unwrap();
        let mut obs = Vec::new();
        for (k, id) in ["A", "B", "C", "D"].iter().enumerate() {
            for t in 0..10u64 {
                // D is present on a single day and must be dropped as sparse
                if *id == "D" && t > 0 || *id == "A" && t == 3 {
                    continue;
                }
                let v = 10.0 + k as f64 + (t % 3) as f64;
                obs.push(RawObservation::new(*id, start + Days::new(t), v).with_category("Snacks"));
            }
        }
        obs
    }

    #[test]
    fn steps_run_in_order() {
        let config = PrepareConfig {
            outliers: None,
            ..PrepareConfig::default()
        };
        let p = prepare(&observations(), &config).unwrap();
        let steps: Vec<&str> = p.provenance.iter().map(|s| s.step.as_str()).collect();
        assert_eq!(
            steps,
            ["assemble", "drop_sparse", "fill_forward", "minmax_scale", "discretize"]
        );
        assert_eq!(p.provenance[1].dropped_ids, vec!["D"]);
        assert_eq!(p.scaled.ids(), vec!["A", "B", "C"]);
        assert_eq!(p.symbolic.len(), 3);
        // A's gap on day 4 is forward-filled in source units
        assert_eq!(p.original.series[0].values[3], p.original.series[0].values[2]);
        assert!(p
            .scaled
            .series
            .iter()
            .flat_map(|s| &s.values)
            .all(|v| (0.1..=1.0).contains(v)));
    }

    #[test]
    fn sales_mode_uses_mean_fill_and_outliers_run_last() {
        let config = PrepareConfig {
            mode: Mode::Sales,
            ..PrepareConfig::default()
        };
        let p = prepare(&observations(), &config).unwrap();
        let steps: Vec<&str> = p.provenance.iter().map(|s| s.step.as_str()).collect();
        assert_eq!(steps[2], "fill_mean");
        assert_eq!(steps.last(), Some(&"filter_outliers"));
    }

    #[test]
    fn rerun_is_identical() {
        let config = PrepareConfig::default();
        assert_eq!(
            prepare(&observations(), &config).unwrap(),
            prepare(&observations(), &config).unwrap()
        );
    }
}
