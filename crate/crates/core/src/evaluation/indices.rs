//! Internal cluster-validity indices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{squared_euclidean, ClusterAssignment};
use crate::distances::mpbd;
use crate::error::EvalError;

/// Which Calinski-Harabasz formula to use.
///
/// `Paper` is the literal `WCSS / BCSS` ratio with unweighted BCSS, where
/// lower is better. `Standard` is `(BCSS_w / (k - 1)) / (WCSS / (n - k))`
/// with size-weighted BCSS, where higher is better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChVariant {
    Paper,
    #[default]
    Standard,
}

impl fmt::Display for ChVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChVariant::Paper => "paper",
            ChVariant::Standard => "standard",
        })
    }
}

impl FromStr for ChVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(ChVariant::Paper),
            "standard" => Ok(ChVariant::Standard),
            other => Err(format!("unknown CH variant `{other}` (expected paper or standard)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcssVariant {
    /// Unweighted sum of squared centroid-to-grand-mean distances.
    Paper,
    /// Each term weighted by cluster size.
    Weighted,
}

/// Member positions per cluster, after checking the assignment against the data.
fn groups(rows: usize, assignment: &ClusterAssignment) -> Result<Vec<Vec<usize>>, EvalError> {
    if assignment.labels.len() != rows {
        return Err(EvalError::SizeMismatch {
            labels: assignment.labels.len(),
            rows,
        });
    }
    let k = assignment.k;
    let mut out = vec![Vec::new(); k];
    for (i, &l) in assignment.labels.iter().enumerate() {
        if l == 0 || l > k {
            return Err(EvalError::LabelOutOfRange { label: l, k });
        }
        out[l - 1].push(i);
    }
    if let Some(c) = out.iter().position(Vec::is_empty) {
        return Err(EvalError::EmptyCluster(c + 1));
    }
    Ok(out)
}

fn mean_of(vectors: &[Vec<f64>], members: impl Iterator<Item = usize>) -> Vec<f64> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; dim];
    let mut count = 0usize;
    for i in members {
        count += 1;
        for (a, v) in acc.iter_mut().zip(&vectors[i]) {
            *a += v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= count as f64);
    acc
}

fn centroids(vectors: &[Vec<f64>], groups: &[Vec<usize>]) -> Vec<Vec<f64>> {
    groups.iter().map(|g| mean_of(vectors, g.iter().copied())).collect()
}

/// Within-cluster sum of squared deviations from the cluster means.
pub fn wcss(vectors: &[Vec<f64>], assignment: &ClusterAssignment) -> Result<f64, EvalError> {
    let groups = groups(vectors.len(), assignment)?;
    let centers = centroids(vectors, &groups);
    Ok(groups
        .iter()
        .zip(&centers)
        .map(|(g, c)| g.iter().map(|&i| squared_euclidean(&vectors[i], c)).sum::<f64>())
        .sum())
}

/// Between-cluster sum of squares around the grand mean.
pub fn bcss(vectors: &[Vec<f64>], assignment: &ClusterAssignment, variant: BcssVariant) -> Result<f64, EvalError> {
    let groups = groups(vectors.len(), assignment)?;
    let centers = centroids(vectors, &groups);
    let grand = mean_of(vectors, 0..vectors.len());
    Ok(groups
        .iter()
        .zip(&centers)
        .map(|(g, c)| {
            let weight = match variant {
                BcssVariant::Paper => 1.0,
                BcssVariant::Weighted => g.len() as f64,
            };
            weight * squared_euclidean(c, &grand)
        })
        .sum())
}

/// Calinski-Harabasz index; requires `2 <= k < n`.
pub fn ch_index(vectors: &[Vec<f64>], assignment: &ClusterAssignment, variant: ChVariant) -> Result<f64, EvalError> {
    let (n, k) = (vectors.len(), assignment.k);
    if k < 2 || k >= n {
        return Err(EvalError::InvalidK { k, n });
    }
    let within = wcss(vectors, assignment)?;
    match variant {
        ChVariant::Paper => {
            let between = bcss(vectors, assignment, BcssVariant::Paper)?;
            if between == 0.0 {
                return Err(EvalError::Degenerate("between-cluster dispersion is zero".into()));
            }
            Ok(within / between)
        }
        ChVariant::Standard => {
            let between = bcss(vectors, assignment, BcssVariant::Weighted)?;
            if within == 0.0 {
                return Err(EvalError::Degenerate("within-cluster dispersion is zero".into()));
            }
            Ok((between / (k - 1) as f64) / (within / (n - k) as f64))
        }
    }
}

/// Davies-Bouldin index with root-mean-square cluster spread.
pub fn db_index(vectors: &[Vec<f64>], assignment: &ClusterAssignment) -> Result<f64, EvalError> {
    let (n, k) = (vectors.len(), assignment.k);
    if k < 2 || k > n {
        return Err(EvalError::InvalidK { k, n });
    }
    let groups = groups(n, assignment)?;
    let centers = centroids(vectors, &groups);
    let spread: Vec<f64> = groups
        .iter()
        .zip(&centers)
        .map(|(g, c)| {
            let ss: f64 = g.iter().map(|&i| squared_euclidean(&vectors[i], c)).sum();
            (ss / g.len() as f64).sqrt()
        })
        .collect();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = f64::NEG_INFINITY;
        for j in (0..k).filter(|&j| j != i) {
            let separation = squared_euclidean(&centers[i], &centers[j]).sqrt();
            if separation == 0.0 {
                return Err(EvalError::Degenerate(format!(
                    "clusters {} and {} have coincident centroids",
                    i + 1,
                    j + 1
                )));
            }
            worst = worst.max((spread[i] + spread[j]) / separation);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// Movement pattern-based index: per cluster, the summed pairwise raw MPBD
/// divided by the cluster size, averaged over clusters. Lower is better.
pub fn mpbi<S, T>(series: &[S], assignment: &ClusterAssignment, omega: f64) -> Result<f64, EvalError>
where
    S: AsRef<[T]> + Sync,
    T: Copy + Into<f64>,
{
    let groups = groups(series.len(), assignment)?;
    let mut total = 0.0;
    for g in &groups {
        let mut pair_sum = 0.0;
        for (a, &i) in g.iter().enumerate() {
            for &j in &g[a + 1..] {
                pair_sum += mpbd(series[i].as_ref(), series[j].as_ref(), omega)?;
            }
        }
        total += pair_sum / g.len() as f64;
    }
    Ok(total / groups.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignment(labels: &[usize]) -> ClusterAssignment {
        let k = *labels.iter().max().unwrap();
        ClusterAssignment {
            ids: (0..labels.len()).map(|i| format!("v{i}")).collect(),
            labels: labels.to_vec(),
            k,
            algorithm: "test".into(),
            seed: 0,
            objective: None,
        }
    }

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn wcss_examples() {
        assert_eq!(wcss(&pts(&[0.0, 5.0, 9.0]), &assignment(&[1, 2, 3])).unwrap(), 0.0);
        assert_eq!(wcss(&pts(&[0.0, 2.0]), &assignment(&[1, 1])).unwrap(), 2.0);
    }

    #[test]
    fn bcss_examples() {
        let v = pts(&[0.0, 2.0]);
        assert_eq!(bcss(&v, &assignment(&[1, 1]), BcssVariant::Paper).unwrap(), 0.0);
        assert_eq!(bcss(&v, &assignment(&[1, 2]), BcssVariant::Paper).unwrap(), 2.0);
        assert_eq!(bcss(&v, &assignment(&[1, 2]), BcssVariant::Weighted).unwrap(), 2.0);
    }

    #[test]
    fn ch_on_tight_blobs() {
        let v = pts(&[0.0, 0.01, 0.02, 10.0, 10.01, 10.02]);
        let a = assignment(&[1, 1, 1, 2, 2, 2]);
        assert!(ch_index(&v, &a, ChVariant::Standard).unwrap() > 1e5);
        assert!(ch_index(&v, &a, ChVariant::Paper).unwrap() < 1e-4);
    }

    #[test]
    fn ch_hand_value() {
        // {0, 2} and {10, 12}: WCSS = 4, grand mean 6, centroids 1 and 11.
        // weighted BCSS = 2*25 + 2*25 = 100 -> (100 / 1) / (4 / 2) = 50
        // paper: 4 / (25 + 25) = 0.08
        let v = pts(&[0.0, 2.0, 10.0, 12.0]);
        let a = assignment(&[1, 1, 2, 2]);
        assert_eq!(ch_index(&v, &a, ChVariant::Standard).unwrap(), 50.0);
        assert_eq!(ch_index(&v, &a, ChVariant::Paper).unwrap(), 0.08);
    }

    #[test]
    fn ch_degenerate_and_range() {
        let v = pts(&[1.0, 1.0, 3.0, 3.0]);
        let err = ch_index(&v, &assignment(&[1, 1, 2, 2]), ChVariant::Standard).unwrap_err();
        assert!(err.is_degenerate());
        assert!(matches!(
            ch_index(&v, &assignment(&[1, 2, 3, 4]), ChVariant::Standard),
            Err(EvalError::InvalidK { .. })
        ));
    }

    #[test]
    fn db_examples() {
        assert_eq!(db_index(&pts(&[0.0, 4.0]), &assignment(&[1, 2])).unwrap(), 0.0);
        let v = pts(&[0.0, 2.0, 10.0, 12.0]);
        assert_eq!(db_index(&v, &assignment(&[1, 1, 2, 2])).unwrap(), 0.2);
        let wider = pts(&[0.0, 2.0, 20.0, 22.0]);
        assert!(db_index(&wider, &assignment(&[1, 1, 2, 2])).unwrap() < 0.2);
    }

    #[test]
    fn db_coincident_centroids() {
        let v = pts(&[0.0, 2.0, 1.0, 1.0]);
        assert!(db_index(&v, &assignment(&[1, 1, 2, 2])).unwrap_err().is_degenerate());
    }

    #[test]
    fn mpbi_examples() {
        let s: Vec<Vec<u8>> = vec![vec![1, 2, 3], vec![3, 2, 1]];
        assert_eq!(mpbi(&s, &assignment(&[1, 2]), 2.0).unwrap(), 0.0);
        // steps: (-1 vs +1) -> 4 each -> raw 8 with omega 2
        let p = vec![
            vec![2u8, 2, 1, 1, 1, 1, 2, 2, 2, 2],
            vec![4u8, 4, 2, 2, 2, 2, 4, 4, 4, 4],
        ];
        assert_eq!(mpbd(&p[0], &p[1], 2.0).unwrap(), 2.0);
        assert_eq!(mpbi(&p, &assignment(&[1, 1]), 2.0).unwrap(), 1.0);
    }

    #[test]
    fn empty_cluster_and_mismatch() {
        let mut a = assignment(&[1, 1]);
        a.k = 2;
        assert_eq!(wcss(&pts(&[0.0, 1.0]), &a).unwrap_err(), EvalError::EmptyCluster(2));
        assert!(matches!(wcss(&pts(&[0.0]), &a), Err(EvalError::SizeMismatch { .. })));
    }
}
