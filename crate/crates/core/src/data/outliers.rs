//! Removal of series that sit far from every other series.

use std::collections::BTreeSet;

use super::series::{ProvenanceStep, SeriesCollection};
use super::symbolic::SymbolicSeries;
use crate::distances::{distance_matrix, MetricSpec, SeriesView};
use crate::error::DataError;

/// Linear-interpolation percentile of `values` (`pct` in `[0, 100]`).
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = pct / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Distance from each series to its nearest other series.
pub fn nearest_neighbor_distances(
    collection: &SeriesCollection,
    symbolic: Option<&[SymbolicSeries]>,
    metric: &MetricSpec,
) -> Result<Vec<f64>, DataError> {
    let view = if metric.accepts_symbolic() {
        match symbolic {
            Some(s) => SeriesView::Symbolic(s),
            None if metric.accepts_numeric() => SeriesView::Numeric(&collection.series),
            None => {
                return Err(DataError::InvalidParameter(format!(
                    "outlier metric `{}` needs the discretized series",
                    metric.kind
                )))
            }
        }
    } else {
        SeriesView::Numeric(&collection.series)
    };
    if view.len() != collection.len() {
        return Err(DataError::InvalidParameter(
            "symbolic and numeric collections differ in size".into(),
        ));
    }
    let m = distance_matrix(view, metric)?;
    Ok((0..m.len())
        .map(|i| {
            m.row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min)
        })
        .collect())
}

/// Drops series whose nearest-neighbor distance exceeds the given percentile
/// of all nearest-neighbor distances.
///
/// Metrics that accept symbol levels (MPBD, Levenshtein) use `symbolic` when
/// it is supplied; it must list the same series in the same order.
pub fn filter_outliers(
    collection: &SeriesCollection,
    symbolic: Option<&[SymbolicSeries]>,
    metric: &MetricSpec,
    pct: f64,
) -> Result<SeriesCollection, DataError> {
    if !(pct > 0.0 && pct <= 100.0) {
        return Err(DataError::InvalidParameter(format!(
            "percentile {pct} must lie in (0, 100]"
        )));
    }
    if collection.len() < 2 {
        return Err(DataError::TooFewSeries(collection.len()));
    }
    let nn = nearest_neighbor_distances(collection, symbolic, metric)?;
    let cutoff = percentile(&nn, pct);
    let keep: BTreeSet<&str> = collection
        .series
        .iter()
        .zip(&nn)
        .filter(|(_, &d)| d <= cutoff)
        .map(|(s, _)| s.id.as_str())
        .collect();
    let mut out = collection.retain_ids(&keep);
    let mut step = ProvenanceStep::new("filter_outliers")
        .param("metric", metric.kind.name())
        .param("percentile", pct)
        .param("cutoff", cutoff)
        .param("symbolic", symbolic.is_some() && metric.accepts_symbolic());
    step.dropped_ids = collection
        .series
        .iter()
        .filter(|s| !keep.contains(s.id.as_str()))
        .map(|s| s.id.clone())
        .collect();
    out.provenance.push(step);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{discretize_collection, Mode, Thresholds, TimeSeries};
    use crate::distances::MetricKind;

    fn collection(rows: Vec<Vec<f64>>) -> SeriesCollection {
        let series = rows
            .into_iter()
            .enumerate()
            .map(|(i, v)| TimeSeries::complete(format!("s{i:02}"), v))
            .collect();
        SeriesCollection::new(
            series,
            Mode::Price,
            chrono::NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0], 50.0), 2.5);
        assert_eq!(percentile(&[5.0, 1.0], 100.0), 5.0);
    }

    #[test]
    fn identical_series_are_kept() {
        let c = collection(vec![vec![0.1, 0.5, 1.0]; 3]);
        let spec = MetricSpec::new(MetricKind::Mpbd);
        let out = filter_outliers(&c, None, &spec, 10.0).unwrap();
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn far_outlier_is_removed() {
        // Ten series share a rising ramp with one small wiggle each; the last zig-zags.
        let mut rows: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let mut v: Vec<f64> = (0..10).map(|t| 0.1 + 0.08 * t as f64).collect();
                v[i] += 0.05;
                v
            })
            .collect();
        rows.push((0..10).map(|t| if t % 2 == 0 { 0.1 } else { 1.0 }).collect());
        let c = collection(rows);
        let sym = discretize_collection(&c, &Thresholds::default()).unwrap();
        let spec = MetricSpec::new(MetricKind::Mpbd);

        // oracle: the outlier has the single largest nearest-neighbor distance
        let nn = nearest_neighbor_distances(&c, Some(&sym), &spec).unwrap();
        let worst = (0..nn.len()).max_by(|&a, &b| nn[a].total_cmp(&nn[b])).unwrap();
        assert_eq!(worst, 10);
        assert!(nn[..10].iter().all(|&d| d < nn[10]));

        let out = filter_outliers(&c, Some(&sym), &spec, 90.0).unwrap();
        assert_eq!(out.len(), 10);
        assert!(out.get("s10").is_none());
        assert_eq!(out.provenance.last().unwrap().dropped_ids, vec!["s10"]);

        let all = filter_outliers(&c, Some(&sym), &spec, 100.0).unwrap();
        assert_eq!(all.len(), 11);
    }

    #[test]
    fn rejects_bad_arguments() {
        let c = collection(vec![vec![0.1, 0.2]]);
        let spec = MetricSpec::new(MetricKind::Euclidean);
        assert!(matches!(
            filter_outliers(&c, None, &spec, 50.0),
            Err(DataError::TooFewSeries(1))
        ));
        let c = collection(vec![vec![0.1, 0.2], vec![0.3, 0.4]]);
        assert!(filter_outliers(&c, None, &spec, 0.0).is_err());
        let lev = MetricSpec::new(MetricKind::Levenshtein);
        assert!(filter_outliers(&c, None, &lev, 50.0).is_err());
    }
}
