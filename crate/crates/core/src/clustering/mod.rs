//! Partitioning algorithms and the assignment type they produce.

mod hierarchical;
mod kmeans;
mod kmedoids;

use std::collections::BTreeSet;

pub use hierarchical::{agglomerative, cut_dendrogram, Dendrogram, Linkage, Merge};
pub use kmeans::{kmeans, squared_euclidean, KMeansConfig, KMeansFit};
pub use kmedoids::{kmedoids, KMedoidsConfig, KMedoidsFit};

use crate::error::ClusterError;

/// Series-to-cluster mapping with provenance.
///
/// Labels are 1-based. Clusters are numbered by decreasing size, ties going
/// to the cluster holding the lexicographically smallest series id, so equal
/// partitions always get equal labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub ids: Vec<String>,
    pub labels: Vec<usize>,
    pub k: usize,
    pub algorithm: String,
    pub seed: u64,
    pub objective: Option<f64>,
}

impl ClusterAssignment {
    /// Builds a canonical assignment from arbitrary group keys in `0..k`.
    pub fn from_groups(
        ids: Vec<String>,
        groups: &[usize],
        k: usize,
        algorithm: impl Into<String>,
        seed: u64,
    ) -> Result<Self, ClusterError> {
        if ids.len() != groups.len() {
            return Err(ClusterError::IdMismatch {
                ids: ids.len(),
                rows: groups.len(),
            });
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, &g) in groups.iter().enumerate() {
            if g >= k {
                return Err(ClusterError::InvalidK {
                    k,
                    n: ids.len(),
                    min: 1,
                });
            }
            members[g].push(i);
        }
        if let Some(empty) = members.iter().position(Vec::is_empty) {
            return Err(ClusterError::EmptyCluster(empty + 1));
        }
        let mut order: Vec<usize> = (0..k).collect();
        let smallest_id = |g: usize| members[g].iter().map(|&i| ids[i].as_str()).min().unwrap_or("");
        order.sort_by(|&a, &b| {
            members[b]
                .len()
                .cmp(&members[a].len())
                .then_with(|| smallest_id(a).cmp(smallest_id(b)))
        });
        let mut labels = vec![0; ids.len()];
        for (rank, &g) in order.iter().enumerate() {
            for &i in &members[g] {
                labels[i] = rank + 1;
            }
        }
        Ok(Self {
            ids,
            labels,
            k,
            algorithm: algorithm.into(),
            seed,
            objective: None,
        })
    }

    pub fn with_objective(mut self, objective: f64) -> Self {
        self.objective = Some(objective);
        self
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Positions of the members of cluster `label` (1-based).
    pub fn members(&self, label: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }

    pub fn label_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|i| self.labels[i])
    }

    /// The partition as sets of ids, independent of label numbering.
    pub fn partition(&self) -> BTreeSet<BTreeSet<String>> {
        (1..=self.k)
            .map(|c| self.members(c).into_iter().map(|i| self.ids[i].clone()).collect())
            .collect()
    }

    /// Checks the shape invariants: one label per id, every cluster non-empty.
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.ids.len() != self.labels.len() {
            return Err(ClusterError::IdMismatch {
                ids: self.ids.len(),
                rows: self.labels.len(),
            });
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l == 0 || l > self.k) {
            return Err(ClusterError::InvalidK {
                k: bad,
                n: self.k,
                min: 1,
            });
        }
        match self.sizes().iter().position(|&s| s == 0) {
            Some(c) => Err(ClusterError::EmptyCluster(c + 1)),
            None => Ok(()),
        }
    }
}

pub(crate) fn check_k(k: usize, n: usize, min: usize) -> Result<(), ClusterError> {
    if k < min || k > n {
        return Err(ClusterError::InvalidK { k, n, min });
    }
    Ok(())
}
