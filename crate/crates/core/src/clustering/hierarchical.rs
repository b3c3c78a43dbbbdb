//! Agglomerative clustering with Lance-Williams distance updates.

use std::fmt;
use std::str::FromStr;

use super::{check_k, ClusterAssignment};
use crate::distances::DistanceMatrix;
use crate::error::ClusterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Linkage {
    Ward,
    Average,
    Complete,
    Single,
}

impl Linkage {
    pub const ALL: [Linkage; 4] = [Linkage::Ward, Linkage::Average, Linkage::Complete, Linkage::Single];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Ward => "ward",
            Linkage::Average => "average",
            Linkage::Complete => "complete",
            Linkage::Single => "single",
        }
    }

    /// Lance-Williams update for the distance from the merged cluster `a+b` to `c`.
    ///
    /// Ward works on squared dissimilarities; the caller squares and roots.
    fn update(self, d_ac: f64, d_bc: f64, d_ab: f64, na: f64, nb: f64, nc: f64) -> f64 {
        match self {
            Linkage::Single => d_ac.min(d_bc),
            Linkage::Complete => d_ac.max(d_bc),
            Linkage::Average => (na * d_ac + nb * d_bc) / (na + nb),
            Linkage::Ward => ((na + nc) * d_ac + (nb + nc) * d_bc - nc * d_ab) / (na + nb + nc),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Linkage::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown linkage `{s}` (expected ward, average, complete or single)"))
    }
}

/// One merge step. Leaves are nodes `0..n`; the merge at step `s` creates node `n + s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
    pub linkage: Linkage,
}

impl Dendrogram {
    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }
}

/// Working state: a dense matrix over "slots". A cluster lives in the slot of
/// its smallest leaf index, so slot order doubles as the tie-break key.
struct Workspace {
    n: usize,
    dist: Vec<f64>,
    active: Vec<bool>,
    size: Vec<usize>,
    node: Vec<usize>,
    // nearest active slot j > i and its distance
    nn: Vec<(usize, f64)>,
}

impl Workspace {
    #[inline]
    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.dist[i * self.n + j] = v;
        self.dist[j * self.n + i] = v;
    }

    fn refresh_nn(&mut self, i: usize) {
        let mut best = (usize::MAX, f64::INFINITY);
        for j in (i + 1)..self.n {
            if self.active[j] && self.d(i, j) < best.1 {
                best = (j, self.d(i, j));
            }
        }
        self.nn[i] = best;
    }
}

/// Builds the full merge tree.
///
/// Each step merges the closest pair of active clusters. Among equal
/// distances the pair whose (smaller, larger) smallest-leaf indices is
/// lexicographically least wins.
pub fn agglomerative(matrix: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram, ClusterError> {
    let n = matrix.len();
    check_k(2, n, 2)?;
    let square = linkage == Linkage::Ward;
    let mut ws = Workspace {
        n,
        dist: (0..n * n)
            .map(|x| {
                let v = matrix.get(x / n, x % n);
                if square {
                    v * v
                } else {
                    v
                }
            })
            .collect(),
        active: vec![true; n],
        size: vec![1; n],
        node: (0..n).collect(),
        nn: vec![(usize::MAX, f64::INFINITY); n],
    };
    for i in 0..n {
        ws.refresh_nn(i);
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut a = usize::MAX;
        let mut best = f64::INFINITY;
        for i in 0..n {
            if ws.active[i] && ws.nn[i].0 != usize::MAX && (a == usize::MAX || ws.nn[i].1 < best) {
                a = i;
                best = ws.nn[i].1;
            }
        }
        let b = ws.nn[a].0;
        let (na, nb) = (ws.size[a] as f64, ws.size[b] as f64);
        let d_ab = ws.d(a, b);
        for c in 0..n {
            if !ws.active[c] || c == a || c == b {
                continue;
            }
            let updated = linkage.update(ws.d(a, c), ws.d(b, c), d_ab, na, nb, ws.size[c] as f64);
            ws.set(a, c, updated);
        }
        merges.push(Merge {
            left: ws.node[a],
            right: ws.node[b],
            height: if square { d_ab.max(0.0).sqrt() } else { d_ab },
            size: ws.size[a] + ws.size[b],
        });
        ws.active[b] = false;
        ws.size[a] += ws.size[b];
        ws.node[a] = n + step;

        for i in 0..n {
            if !ws.active[i] {
                continue;
            }
            if i == a || ws.nn[i].0 == a || ws.nn[i].0 == b {
                ws.refresh_nn(i);
            } else if i < a {
                let d = ws.d(i, a);
                if d < ws.nn[i].1 || (d == ws.nn[i].1 && a < ws.nn[i].0) {
                    ws.nn[i] = (a, d);
                }
            }
        }
    }

    Ok(Dendrogram {
        leaves: matrix.ids().to_vec(),
        merges,
        linkage,
    })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Flat clustering with exactly `k` clusters: applies the first `n - k` merges.
pub fn cut_dendrogram(dendrogram: &Dendrogram, k: usize) -> Result<ClusterAssignment, ClusterError> {
    let n = dendrogram.len();
    check_k(k, n, 1)?;
    let mut parent: Vec<usize> = (0..2 * n).collect();
    for (step, m) in dendrogram.merges.iter().take(n - k).enumerate() {
        let node = n + step;
        parent[m.left] = node;
        parent[m.right] = node;
    }
    let mut roots: Vec<usize> = (0..n).map(|leaf| find(&mut parent, leaf)).collect();
    let mut distinct = roots.clone();
    distinct.sort_unstable();
    distinct.dedup();
    for r in &mut roots {
        *r = distinct.binary_search(r).expect("root present");
    }
    ClusterAssignment::from_groups(
        dendrogram.leaves.clone(),
        &roots,
        k,
        format!("hierarchical-{}", dendrogram.linkage),
        0,
    )
}
