//! Lloyd's k-means with seeded k-means++ initialization and restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_k, ClusterAssignment};
use crate::error::ClusterError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    /// Independent initializations; the run with the lowest WCSS is kept.
    pub n_init: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: 300,
            tol: 1e-6,
            n_init: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub assignment: ClusterAssignment,
    /// Final centroids, indexed by canonical label - 1.
    pub centroids: Vec<Vec<f64>>,
    /// WCSS after the initial assignment and after every iteration of the kept run.
    pub wcss_history: Vec<f64>,
    pub iterations: usize,
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid per point; ties go to the lower centroid index.
fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<(usize, f64)> {
    data.par_iter()
        .map(|x| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = squared_euclidean(x, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .collect()
}

fn means(data: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = data[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &l) in data.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn wcss_of(data: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    data.iter()
        .zip(labels)
        .map(|(x, &l)| squared_euclidean(x, &centroids[l]))
        .sum()
}

/// Gives every empty cluster the point farthest from its current centroid,
/// taken from a cluster that keeps at least one member.
fn repair_empty(data: &[Vec<f64>], labels: &mut [usize], dists: &mut [f64], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let donor = (0..labels.len())
            .filter(|&i| counts[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            })
            .expect("k <= n guarantees a cluster with two members");
        labels[donor] = empty;
        dists[donor] = 0.0;
        centroids[empty] = data[donor].clone();
    }
}

/// k-means++: first centroid uniform, then each next point drawn with
/// probability proportional to its squared distance to the nearest chosen one.
fn initial_centroids(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = data.iter().map(|x| squared_euclidean(x, &data[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if target < d {
                        break;
                    }
                    target -= d;
                }
            }
            pick.expect("positive total")
        } else {
            // all remaining points coincide with a centroid
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (d, x) in nearest.iter_mut().zip(data) {
            *d = d.min(squared_euclidean(x, &data[next]));
        }
    }
    chosen.into_iter().map(|i| data[i].clone()).collect()
}

fn validate(ids: &[String], data: &[Vec<f64>]) -> Result<(), ClusterError> {
    if ids.len() != data.len() {
        return Err(ClusterError::IdMismatch {
            ids: ids.len(),
            rows: data.len(),
        });
    }
    let dim = data.first().map_or(0, Vec::len);
    if data.iter().any(|x| x.len() != dim) {
        return Err(ClusterError::Ragged);
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ClusterError::NonFinite);
    }
    Ok(())
}

/// Single-point transfers that strictly lower WCSS, in passes over the data.
///
/// Moving `x` from cluster `a` to `b` changes WCSS by
/// `n_b/(n_b+1)·|x-c_b|² - n_a/(n_a-1)·|x-c_a|²`. A state with no improving
/// transfer is also a fixed point of Lloyd's assignment step.
fn transfer_passes(
    data: &[Vec<f64>],
    labels: &mut [usize],
    centroids: &mut Vec<Vec<f64>>,
    history: &mut Vec<f64>,
    max_passes: usize,
) -> usize {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l] += 1);
    let mut passes = 0;
    while passes < max_passes {
        passes += 1;
        let mut moved = false;
        for i in 0..data.len() {
            let a = labels[i];
            if counts[a] < 2 {
                continue;
            }
            let na = counts[a] as f64;
            let removal = na / (na - 1.0) * squared_euclidean(&data[i], &centroids[a]);
            let mut best: Option<(usize, f64)> = None;
            for b in (0..k).filter(|&b| b != a) {
                let nb = counts[b] as f64;
                let add = nb / (nb + 1.0) * squared_euclidean(&data[i], &centroids[b]);
                if best.is_none_or(|(_, v)| add < v) {
                    best = Some((b, add));
                }
            }
            if let Some((b, add)) = best {
                if add < removal * (1.0 - 1e-12) {
                    labels[i] = b;
                    counts[a] -= 1;
                    counts[b] += 1;
                    *centroids = means(data, labels, k);
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
        history.push(wcss_of(data, labels, centroids));
    }
    passes
}

struct Run {
    labels: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    history: Vec<f64>,
    iterations: usize,
}

/// Lloyd iterations until the assignment is stable, the WCSS gain drops
/// below `tol`, or `max_iter` is reached, then transfer passes.
fn lloyd(data: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, config: &KMeansConfig) -> Run {
    let k = config.k;
    let (mut labels, mut dists): (Vec<usize>, Vec<f64>) = assign(data, &centroids).into_iter().unzip();
    repair_empty(data, &mut labels, &mut dists, &mut centroids);
    centroids = means(data, &labels, k);
    let mut history = vec![wcss_of(data, &labels, &centroids)];

    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let (mut next, mut next_dists): (Vec<usize>, Vec<f64>) = assign(data, &centroids).into_iter().unzip();
        repair_empty(data, &mut next, &mut next_dists, &mut centroids);
        let stable = next == labels;
        labels = next;
        centroids = means(data, &labels, k);
        let current = wcss_of(data, &labels, &centroids);
        let previous = *history.last().expect("seeded");
        debug_assert!(
            current <= previous + 1e-9 * previous.abs().max(1.0),
            "WCSS increased from {previous} to {current}"
        );
        history.push(current);
        if stable || previous - current < config.tol {
            break;
        }
    }
    let budget = config.max_iter.saturating_sub(iterations);
    iterations += transfer_passes(data, &mut labels, &mut centroids, &mut history, budget);
    Run {
        labels,
        centroids,
        history,
        iterations,
    }
}

/// Runs `n_init` seeded initializations and keeps the lowest final WCSS
/// (the earliest run on ties).
pub fn kmeans(ids: &[String], data: &[Vec<f64>], config: &KMeansConfig) -> Result<KMeansFit, ClusterError> {
    validate(ids, data)?;
    let k = config.k;
    check_k(k, data.len(), 2)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let inits: Vec<Vec<Vec<f64>>> = (0..config.n_init.max(1))
        .map(|_| initial_centroids(data, k, &mut rng))
        .collect();
    let mut best: Option<Run> = None;
    for init in inits {
        let run = lloyd(data, init, config);
        let better = best.as_ref().is_none_or(|b| run.history.last() < b.history.last());
        if better {
            best = Some(run);
        }
    }
    let Run {
        labels,
        centroids,
        history,
        iterations,
    } = best.expect("at least one run");

    let objective = *history.last().expect("seeded");
    let assignment =
        ClusterAssignment::from_groups(ids.to_vec(), &labels, k, "kmeans", config.seed)?.with_objective(objective);
    // reorder centroids to canonical label order
    let mut ordered = vec![Vec::new(); k];
    for (raw, canonical) in labels.iter().zip(&assignment.labels) {
        if ordered[canonical - 1].is_empty() {
            ordered[canonical - 1] = centroids[*raw].clone();
        }
    }
    Ok(KMeansFit {
        assignment,
        centroids: ordered,
        wcss_history: history,
        iterations,
    })
}
