//! Per-cluster summaries: size, category mix and value statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use movepat::clustering::ClusterAssignment;
use movepat::data::{Mode, SeriesMeta, TimeSeries};
use movepat::io::{fmt_real, write_rows};
use movepat::FormatError;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterProfile {
    pub cluster: usize,
    pub size: usize,
    pub n_categories: usize,
    /// Up to two `(category, series count)` pairs, largest first.
    pub top_categories: Vec<(String, usize)>,
    pub avg_value: f64,
    pub min_value: f64,
    pub max_value: f64,
    /// Sales mode only: distinct items and stores.
    pub n_products: Option<usize>,
    pub n_stores: Option<usize>,
}

/// One profile per cluster. Value statistics run over the original values of
/// every member on every day.
pub fn profile_clusters(
    assignment: &ClusterAssignment,
    metadata: &BTreeMap<String, SeriesMeta>,
    original: &[TimeSeries],
    mode: Mode,
) -> Result<Vec<ClusterProfile>, CliError> {
    let by_id: BTreeMap<&str, &TimeSeries> = original.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut missing = Vec::new();
    for id in &assignment.ids {
        if !metadata.contains_key(id) || !by_id.contains_key(id.as_str()) {
            missing.push(id.clone());
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Mismatch(format!(
            "no metadata or values for {}",
            missing.join(", ")
        )));
    }

    (1..=assignment.k)
        .map(|c| {
            let members: Vec<&str> = assignment
                .members(c)
                .iter()
                .map(|&i| assignment.ids[i].as_str())
                .collect();
            let mut categories: BTreeMap<&str, usize> = BTreeMap::new();
            let mut items = BTreeSet::new();
            let mut stores = BTreeSet::new();
            let (mut sum, mut count, mut lo, mut hi) = (0.0, 0usize, f64::INFINITY, f64::NEG_INFINITY);
            for id in &members {
                let meta = &metadata[*id];
                if let Some(cat) = &meta.category {
                    *categories.entry(cat.as_str()).or_default() += 1;
                }
                items.insert(meta.item.as_str());
                if let Some(store) = &meta.store {
                    stores.insert(store.as_str());
                }
                for &v in &by_id[id].values {
                    sum += v;
                    count += 1;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            let mut ranked: Vec<(String, usize)> = categories.iter().map(|(k, v)| (k.to_string(), *v)).collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            let n_categories = ranked.len();
            ranked.truncate(2);
            let sales = mode == Mode::Sales;
            Ok(ClusterProfile {
                cluster: c,
                size: members.len(),
                n_categories,
                top_categories: ranked,
                avg_value: sum / count as f64,
                min_value: lo,
                max_value: hi,
                n_products: sales.then_some(items.len()),
                n_stores: sales.then_some(stores.len()),
            })
        })
        .collect()
}

/// `cluster,size,n_categories,top_categories,avg_value,min_value,max_value`,
/// plus `n_products,n_stores` in sales mode. Top categories read `Pet: 9; Food: 3`.
pub fn write_profiles(path: &Path, profiles: &[ClusterProfile], mode: Mode) -> Result<(), FormatError> {
    let mut header = vec![
        "cluster",
        "size",
        "n_categories",
        "top_categories",
        "avg_value",
        "min_value",
        "max_value",
    ];
    if mode == Mode::Sales {
        header.extend(["n_products", "n_stores"]);
    }
    let mut rows = vec![header.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for p in profiles {
        let top: Vec<String> = p.top_categories.iter().map(|(c, n)| format!("{c}: {n}")).collect();
        let mut row = vec![
            p.cluster.to_string(),
            p.size.to_string(),
            p.n_categories.to_string(),
            top.join("; "),
            fmt_real(p.avg_value),
            fmt_real(p.min_value),
            fmt_real(p.max_value),
        ];
        if mode == Mode::Sales {
            row.push(p.n_products.unwrap_or(0).to_string());
            row.push(p.n_stores.unwrap_or(0).to_string());
        }
        rows.push(row);
    }
    write_rows(path, &rows)
}
