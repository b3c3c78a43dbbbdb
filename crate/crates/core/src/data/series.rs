//! Aligned series, collections, and the numeric preprocessing steps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ingest::RawObservation;
use crate::error::DataError;

/// What the values represent; decides the series key and the fill strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Price,
    Sales,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Price => "price",
            Mode::Sales => "sales",
        })
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "price" => Ok(Mode::Price),
            "sales" => Ok(Mode::Sales),
            other => Err(format!("unknown mode `{other}` (expected price or sales)")),
        }
    }
}

/// Descriptive attributes carried alongside a series.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesMeta {
    /// The raw `series_id` column value (the product/item key).
    pub item: String,
    pub category: Option<String>,
    pub store: Option<String>,
}

/// One entity's value history on the collection's shared daily index.
///
/// Missing positions hold `NaN` until a fill step replaces them; `missing`
/// keeps recording which positions were absent in the raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub id: String,
    pub values: Vec<f64>,
    pub missing: Vec<bool>,
    pub meta: SeriesMeta,
}

impl TimeSeries {
    /// A complete series with no missing positions.
    pub fn complete(id: impl Into<String>, values: Vec<f64>) -> Self {
        let id = id.into();
        let missing = vec![false; values.len()];
        Self {
            meta: SeriesMeta {
                item: id.clone(),
                ..SeriesMeta::default()
            },
            id,
            values,
            missing,
        }
    }

    /// Builds a series from optional values; `None` marks a missing position.
    pub fn from_options(id: impl Into<String>, values: &[Option<f64>]) -> Self {
        let mut s = Self::complete(id, values.iter().map(|v| v.unwrap_or(f64::NAN)).collect());
        s.missing = values.iter().map(Option::is_none).collect();
        s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    /// True when every position holds a finite value.
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn present(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.missing)
            .filter(|(v, &m)| !m && v.is_finite())
            .map(|(&v, _)| v)
    }
}

/// One recorded preprocessing step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceStep {
    pub step: String,
    pub params: BTreeMap<String, Value>,
    pub dropped_ids: Vec<String>,
}

impl ProvenanceStep {
    pub fn new(step: impl Into<String>) -> Self {
        Self {
            step: step.into(),
            params: BTreeMap::new(),
            dropped_ids: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }
}

/// Equal-length series sharing one date index.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCollection {
    pub series: Vec<TimeSeries>,
    pub mode: Mode,
    pub start: NaiveDate,
    pub provenance: Vec<ProvenanceStep>,
}

impl SeriesCollection {
    /// Builds a collection, checking that ids are unique and lengths agree.
    pub fn new(series: Vec<TimeSeries>, mode: Mode, start: NaiveDate) -> Result<Self, DataError> {
        let mut ids = BTreeSet::new();
        for s in &series {
            if !ids.insert(s.id.as_str()) {
                return Err(DataError::InvalidParameter(format!("duplicate series id `{}`", s.id)));
            }
            if s.values.len() != series[0].values.len() || s.missing.len() != s.values.len() {
                return Err(DataError::InvalidParameter(format!(
                    "series `{}` does not match the collection length",
                    s.id
                )));
            }
        }
        Ok(Self {
            series,
            mode,
            start,
            provenance: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Length shared by every member (0 for an empty collection).
    pub fn series_len(&self) -> usize {
        self.series.first().map_or(0, TimeSeries::len)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.series.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.series_len() as u64)
            .map(|i| self.start + Days::new(i))
            .collect()
    }

    pub fn get(&self, id: &str) -> Option<&TimeSeries> {
        self.series.iter().find(|s| s.id == id)
    }

    /// Keeps only the members whose id is in `keep`, preserving order.
    pub fn retain_ids(&self, keep: &BTreeSet<&str>) -> SeriesCollection {
        let mut out = self.clone();
        out.series.retain(|s| keep.contains(s.id.as_str()));
        out
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.series.iter().map(|s| s.values.clone()).collect()
    }

    fn map_series<F>(&self, step: ProvenanceStep, f: F) -> Result<SeriesCollection, DataError>
    where
        F: Fn(&TimeSeries) -> Result<TimeSeries, DataError>,
    {
        let series = self.series.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        let mut provenance = self.provenance.clone();
        provenance.push(step);
        Ok(SeriesCollection {
            series,
            mode: self.mode,
            start: self.start,
            provenance,
        })
    }
}

/// Inclusive calendar range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self, DataError> {
        if start > end {
            return Err(DataError::DateRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn days(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }
}

/// Series key: the item id alone in price mode, `item@store` in sales mode.
pub fn series_key(mode: Mode, item: &str, store: Option<&str>) -> String {
    match (mode, store) {
        (Mode::Sales, Some(store)) => format!("{item}@{store}"),
        _ => item.to_owned(),
    }
}

/// Aligns raw observations onto a shared daily index.
///
/// Without an explicit range the index spans the earliest to latest date
/// present. Observations outside an explicit range are ignored and counted
/// in the provenance record.
pub fn assemble_series(
    observations: &[RawObservation],
    mode: Mode,
    range: Option<DateRange>,
) -> Result<SeriesCollection, DataError> {
    if observations.is_empty() {
        return Err(DataError::Empty);
    }
    let range = match range {
        Some(r) => r,
        None => {
            let start = observations.iter().map(|o| o.date).min().expect("non-empty");
            let end = observations.iter().map(|o| o.date).max().expect("non-empty");
            DateRange::new(start, end)?
        }
    };
    let n = range.days();

    struct Building {
        values: Vec<f64>,
        missing: Vec<bool>,
        meta: SeriesMeta,
    }
    let mut by_key: BTreeMap<String, Building> = BTreeMap::new();
    let mut ignored = 0usize;
    for obs in observations {
        let key = series_key(mode, &obs.series_id, obs.store.as_deref());
        let entry = by_key.entry(key).or_insert_with(|| Building {
            values: vec![f64::NAN; n],
            missing: vec![true; n],
            meta: SeriesMeta {
                item: obs.series_id.clone(),
                category: None,
                store: if mode == Mode::Sales { obs.store.clone() } else { None },
            },
        });
        if entry.meta.category.is_none() {
            entry.meta.category = obs.category.clone();
        }
        if obs.date < range.start || obs.date > range.end {
            ignored += 1;
            continue;
        }
        let pos = (obs.date - range.start).num_days() as usize;
        if !entry.missing[pos] {
            return Err(DataError::DuplicateKey {
                series_id: obs.series_id.clone(),
                date: obs.date,
                line: obs.line,
            });
        }
        entry.values[pos] = obs.value;
        entry.missing[pos] = false;
    }

    let series = by_key
        .into_iter()
        .map(|(id, b)| TimeSeries {
            id,
            values: b.values,
            missing: b.missing,
            meta: b.meta,
        })
        .collect();
    let mut collection = SeriesCollection::new(series, mode, range.start)?;
    collection.provenance.push(
        ProvenanceStep::new("assemble")
            .param("mode", mode.to_string())
            .param("start", range.start.to_string())
            .param("end", range.end.to_string())
            .param("length", n)
            .param("ignored_out_of_range", ignored),
    );
    Ok(collection)
}

/// Removes series whose missing fraction is strictly above `max_missing_fraction`.
pub fn drop_sparse(collection: &SeriesCollection, max_missing_fraction: f64) -> Result<SeriesCollection, DataError> {
    if !(0.0..=1.0).contains(&max_missing_fraction) {
        return Err(DataError::InvalidParameter(format!(
            "max_missing_fraction {max_missing_fraction} must lie in [0, 1]"
        )));
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for s in &collection.series {
        // Compare counts rather than fractions so the boundary is exact.
        let n = s.len() as f64;
        if (s.missing_count() as f64) > max_missing_fraction * n {
            dropped.push(s.id.clone());
        } else {
            kept.push(s.clone());
        }
    }
    let mut step = ProvenanceStep::new("drop_sparse").param("max_missing_fraction", max_missing_fraction);
    step.dropped_ids = dropped;
    let mut provenance = collection.provenance.clone();
    provenance.push(step);
    Ok(SeriesCollection {
        series: kept,
        mode: collection.mode,
        start: collection.start,
        provenance,
    })
}

/// Carries the most recent present value forward; leading gaps take the first present value.
pub fn fill_forward(series: &TimeSeries) -> Result<TimeSeries, DataError> {
    let first = series
        .present()
        .next()
        .ok_or_else(|| DataError::AllMissing(series.id.clone()))?;
    let mut out = series.clone();
    let mut last = first;
    for (v, &m) in out.values.iter_mut().zip(&series.missing) {
        if m || !v.is_finite() {
            *v = last;
        } else {
            last = *v;
        }
    }
    Ok(out)
}

/// Replaces every missing position with the mean of the series' present values.
pub fn fill_mean(series: &TimeSeries) -> Result<TimeSeries, DataError> {
    let (sum, count) = series.present().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        return Err(DataError::AllMissing(series.id.clone()));
    }
    let mean = sum / count as f64;
    let mut out = series.clone();
    for (v, &m) in out.values.iter_mut().zip(&series.missing) {
        if m || !v.is_finite() {
            *v = mean;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillStrategy {
    Forward,
    Mean,
}

impl FillStrategy {
    /// Forward fill for prices, mean fill for sales.
    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Price => FillStrategy::Forward,
            Mode::Sales => FillStrategy::Mean,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FillStrategy::Forward => "fill_forward",
            FillStrategy::Mean => "fill_mean",
        }
    }
}

impl FromStr for FillStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(FillStrategy::Forward),
            "mean" => Ok(FillStrategy::Mean),
            other => Err(format!("unknown fill strategy `{other}` (expected forward or mean)")),
        }
    }
}

pub fn fill_collection(collection: &SeriesCollection, strategy: FillStrategy) -> Result<SeriesCollection, DataError> {
    let filled: usize = collection.series.iter().map(TimeSeries::missing_count).sum();
    let step = ProvenanceStep::new(strategy.name()).param("filled_positions", filled);
    collection.map_series(step, |s| match strategy {
        FillStrategy::Forward => fill_forward(s),
        FillStrategy::Mean => fill_mean(s),
    })
}

/// Per-series min-max scaling into `[lo, hi]`. Constant series map to `lo`.
pub fn minmax_scale(series: &TimeSeries, lo: f64, hi: f64) -> Result<TimeSeries, DataError> {
    if !(lo < hi) {
        return Err(DataError::InvalidParameter(format!(
            "scale bounds require lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !series.is_complete() {
        return Err(DataError::Incomplete(series.id.clone()));
    }
    let min = series.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = series.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut out = series.clone();
    for v in &mut out.values {
        *v = if span == 0.0 || *v == min {
            lo
        } else if *v == max {
            hi
        } else {
            lo + (hi - lo) * (*v - min) / span
        };
    }
    Ok(out)
}

pub fn scale_collection(collection: &SeriesCollection, lo: f64, hi: f64) -> Result<SeriesCollection, DataError> {
    let step = ProvenanceStep::new("minmax_scale").param("lo", lo).param("hi", hi);
    collection.map_series(step, |s| minmax_scale(s, lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ingest::parse_date;

    fn d(s: &str) -> NaiveDate {
        parse_date(s).unwrap()
    }

    fn opt(values: &[Option<f64>]) -> TimeSeries {
        TimeSeries::from_options("s", values)
    }

    #[test]
    fn assemble_full_coverage() {
        let obs: Vec<_> = ["A", "B"]
            .iter()
            .flat_map(|id| {
                ["2021-01-01", "2021-01-02", "2021-01-03"]
                    .iter()
                    .map(move |day| RawObservation::new(*id, d(day), 1.0))
            })
            .collect();
        let c = assemble_series(&obs, Mode::Price, None).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.series_len(), 3);
        assert!(c.series.iter().all(|s| s.missing_count() == 0));
    }

    #[test]
    fn assemble_marks_gaps() {
        let obs = vec![
            RawObservation::new("A", d("2021-01-01"), 1.0),
            RawObservation::new("A", d("2021-01-03"), 3.0),
        ];
        let c = assemble_series(&obs, Mode::Price, None).unwrap();
        assert_eq!(c.series[0].missing, vec![false, true, false]);
        assert!(c.series[0].values[1].is_nan());
    }

    #[test]
    fn sales_mode_keys_by_store() {
        let obs = vec![
            RawObservation::new("I1", d("2021-01-01"), 1.0).with_store("S1"),
            RawObservation::new("I1", d("2021-01-01"), 2.0).with_store("S2"),
        ];
        let c = assemble_series(&obs, Mode::Sales, None).unwrap();
        assert_eq!(c.ids(), vec!["I1@S1", "I1@S2"]);
        assert_eq!(c.series[1].meta.store.as_deref(), Some("S2"));
        assert_eq!(c.series[1].meta.item, "I1");

        let err = assemble_series(&obs, Mode::Price, None).unwrap_err();
        assert!(matches!(err, DataError::DuplicateKey { .. }));
    }

    #[test]
    fn assemble_rejects_empty_and_inverted_range() {
        assert!(matches!(assemble_series(&[], Mode::Price, None), Err(DataError::Empty)));
        assert!(DateRange::new(d("2021-01-02"), d("2021-01-01")).is_err());
    }

    #[test]
    fn explicit_range_ignores_outside_dates() {
        let obs = vec![
            RawObservation::new("A", d("2021-01-01"), 1.0),
            RawObservation::new("A", d("2021-01-05"), 3.0),
        ];
        let range = DateRange::new(d("2021-01-01"), d("2021-01-02")).unwrap();
        let c = assemble_series(&obs, Mode::Price, Some(range)).unwrap();
        assert_eq!(c.series_len(), 2);
        assert_eq!(c.provenance[0].params["ignored_out_of_range"], 1);
    }

    fn sparse(missing: usize, n: usize) -> TimeSeries {
        let v: Vec<Option<f64>> = (0..n).map(|i| if i < missing { None } else { Some(1.0) }).collect();
        TimeSeries::from_options(format!("m{missing}"), &v)
    }

    #[test]
    fn drop_sparse_boundary_is_strict() {
        let start = d("2021-01-01");
        // 81 of 100 is over 80% and goes; 8 of 10 is exactly 80% and stays.
        let c10 = SeriesCollection::new(vec![sparse(8, 10), sparse(0, 10), sparse(9, 10)], Mode::Price, start).unwrap();
        let out = drop_sparse(&c10, 0.8).unwrap();
        assert_eq!(out.ids(), vec!["m8", "m0"]);
        assert_eq!(out.provenance.last().unwrap().dropped_ids, vec!["m9"]);

        let c100 = SeriesCollection::new(vec![sparse(81, 100), sparse(80, 100)], Mode::Price, start).unwrap();
        assert_eq!(drop_sparse(&c100, 0.8).unwrap().ids(), vec!["m80"]);
    }

    #[test]
    fn drop_sparse_is_idempotent() {
        let start = d("2021-01-01");
        let c = SeriesCollection::new(vec![sparse(3, 4), sparse(1, 4), sparse(4, 4)], Mode::Price, start).unwrap();
        let once = drop_sparse(&c, 0.5).unwrap();
        let twice = drop_sparse(&once, 0.5).unwrap();
        assert_eq!(once.ids(), vec!["m1"]);
        assert_eq!(once.ids(), twice.ids());
        assert!(twice.provenance.last().unwrap().dropped_ids.is_empty());
        assert!(drop_sparse(&c, 1.5).is_err());
    }

    #[test]
    fn forward_fill_examples() {
        let f = fill_forward(&opt(&[Some(5.0), None, None, Some(7.0)])).unwrap();
        assert_eq!(f.values, vec![5.0, 5.0, 5.0, 7.0]);
        let f = fill_forward(&opt(&[None, Some(3.0), None])).unwrap();
        assert_eq!(f.values, vec![3.0, 3.0, 3.0]);
        let f = fill_forward(&opt(&[Some(4.0); 3])).unwrap();
        assert_eq!(f.values, vec![4.0; 3]);
        assert!(matches!(
            fill_forward(&opt(&[None, None])),
            Err(DataError::AllMissing(_))
        ));
    }

    #[test]
    fn mean_fill_examples() {
        let f = fill_mean(&opt(&[Some(2.0), None, Some(4.0)])).unwrap();
        assert_eq!(f.values, vec![2.0, 3.0, 4.0]);
        let f = fill_mean(&opt(&[None, None, Some(5.0)])).unwrap();
        assert_eq!(f.values, vec![5.0; 3]);
        let f = fill_mean(&opt(&[Some(1.0), Some(2.0)])).unwrap();
        assert_eq!(f.values, vec![1.0, 2.0]);
        assert!(fill_mean(&opt(&[None])).is_err());
    }

    #[test]
    fn fills_keep_missing_mask() {
        let s = opt(&[None, Some(1.0), None, Some(2.0)]);
        let f = fill_forward(&s).unwrap();
        assert_eq!(f.missing, s.missing);
        assert!(f.is_complete());
    }

    #[test]
    fn minmax_examples() {
        let s = minmax_scale(&TimeSeries::complete("a", vec![10.0, 55.0, 100.0]), 0.1, 1.0).unwrap();
        assert_eq!(s.values[0], 0.1);
        assert!((s.values[1] - 0.55).abs() < 1e-12);
        assert_eq!(s.values[2], 1.0);
        let s = minmax_scale(&TimeSeries::complete("a", vec![7.0; 3]), 0.1, 1.0).unwrap();
        assert_eq!(s.values, vec![0.1; 3]);
        let s = minmax_scale(&TimeSeries::complete("a", vec![0.0, 1.0]), 0.1, 1.0).unwrap();
        assert_eq!(s.values, vec![0.1, 1.0]);
    }

    #[test]
    fn minmax_rejects_bad_input() {
        assert!(minmax_scale(&TimeSeries::complete("a", vec![1.0, 2.0]), 1.0, 1.0).is_err());
        let gap = opt(&[Some(1.0), None]);
        assert!(matches!(minmax_scale(&gap, 0.1, 1.0), Err(DataError::Incomplete(_))));
    }
}
