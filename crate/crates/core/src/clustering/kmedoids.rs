//! k-medoids over a precomputed dissimilarity matrix.
//!
//! Each start alternates assign/update rounds; when the alternation settles,
//! the best improving medoid swap (if any) is applied and alternation
//! resumes. The first start uses greedy BUILD, later ones seeded random
//! medoid sets, and the cheapest result is kept.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_k, ClusterAssignment};
use crate::distances::DistanceMatrix;
use crate::error::ClusterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMedoidsConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub n_init: usize,
}

impl KMedoidsConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: 100,
            n_init: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMedoidsFit {
    pub assignment: ClusterAssignment,
    /// Medoid positions, indexed by canonical label - 1.
    pub medoids: Vec<usize>,
    pub cost: f64,
    pub iterations: usize,
}

/// Assigns each point to its nearest medoid (ties: earlier medoid); medoids keep themselves.
fn assign(m: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut cost = 0.0;
    let labels = (0..m.len())
        .map(|i| {
            if let Some(own) = medoids.iter().position(|&c| c == i) {
                return own;
            }
            let (best, d) = medoids
                .iter()
                .enumerate()
                .map(|(c, &med)| (c, m.get(i, med)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            cost += d;
            best
        })
        .collect();
    (labels, cost)
}

fn total_cost(m: &DistanceMatrix, medoids: &[usize]) -> f64 {
    assign(m, medoids).1
}

fn build(m: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = m.len();
    let first = (0..n)
        .map(|i| (i, m.row(i).iter().sum::<f64>()))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
        .0;
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = (0..n).map(|i| m.get(i, first)).collect();
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for cand in (0..n).filter(|c| !medoids.contains(c)) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - m.get(j, cand)).max(0.0)).sum();
            if gain > best.1 {
                best = (cand, gain);
            }
        }
        medoids.push(best.0);
        for (j, d) in nearest.iter_mut().enumerate() {
            *d = d.min(m.get(j, best.0));
        }
    }
    medoids
}

/// Member minimizing the summed distance to the rest of its cluster.
fn best_medoid(m: &DistanceMatrix, members: &[usize]) -> usize {
    members
        .iter()
        .map(|&c| (c, members.iter().map(|&j| m.get(c, j)).sum::<f64>()))
        .fold((usize::MAX, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
        .0
}

/// Best improving single swap, scored in O(n) per candidate via nearest and
/// second-nearest medoid distances.
fn best_swap(m: &DistanceMatrix, medoids: &[usize], current: f64) -> Option<Vec<usize>> {
    let n = m.len();
    let mut nearest = vec![(usize::MAX, f64::INFINITY); n];
    let mut second = vec![f64::INFINITY; n];
    for j in 0..n {
        for (slot, &med) in medoids.iter().enumerate() {
            let d = m.get(j, med);
            if d < nearest[j].1 {
                second[j] = nearest[j].1;
                nearest[j] = (slot, d);
            } else if d < second[j] {
                second[j] = d;
            }
        }
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for slot in 0..medoids.len() {
        for cand in (0..n).filter(|c| !medoids.contains(c)) {
            let cost: f64 = (0..n)
                .map(|j| {
                    let keep = if nearest[j].0 == slot { second[j] } else { nearest[j].1 };
                    keep.min(m.get(j, cand))
                })
                .sum();
            let threshold = best.map_or(current, |b| b.2);
            // relative slack keeps rounding noise from cycling
            if cost < threshold - 1e-12 * threshold.abs().max(1.0) {
                best = Some((slot, cand, cost));
            }
        }
    }
    best.map(|(slot, cand, _)| {
        let mut swapped = medoids.to_vec();
        swapped[slot] = cand;
        swapped
    })
}

fn refine(matrix: &DistanceMatrix, mut medoids: Vec<usize>, max_iter: usize) -> (Vec<usize>, usize) {
    let n = matrix.len();
    let k = medoids.len();
    let mut iterations = 0;
    loop {
        // alternate until medoids stop moving
        while iterations < max_iter {
            iterations += 1;
            let (labels, _) = assign(matrix, &medoids);
            let updated: Vec<usize> = (0..k)
                .map(|c| {
                    let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
                    best_medoid(matrix, &members)
                })
                .collect();
            if updated == medoids {
                break;
            }
            medoids = updated;
        }
        if iterations >= max_iter {
            break;
        }
        match best_swap(matrix, &medoids, total_cost(matrix, &medoids)) {
            Some(swapped) => medoids = swapped,
            None => break,
        }
    }
    (medoids, iterations)
}

pub fn kmedoids(matrix: &DistanceMatrix, config: &KMedoidsConfig) -> Result<KMedoidsFit, ClusterError> {
    let n = matrix.len();
    let k = config.k;
    check_k(k, n, 2)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<(Vec<usize>, usize, f64)> = None;
    for start in 0..config.n_init.max(1) {
        let init = if start == 0 {
            build(matrix, k)
        } else {
            sample(&mut rng, n, k).into_vec()
        };
        let (medoids, iterations) = refine(matrix, init, config.max_iter);
        let cost = total_cost(matrix, &medoids);
        if best.as_ref().is_none_or(|b| cost < b.2) {
            best = Some((medoids, iterations, cost));
        }
    }
    let (medoids, iterations, _) = best.expect("at least one start");

    let (labels, cost) = assign(matrix, &medoids);
    let assignment = ClusterAssignment::from_groups(matrix.ids().to_vec(), &labels, k, "kmedoids", config.seed)?
        .with_objective(cost);
    let mut ordered = vec![0; k];
    for (c, &med) in medoids.iter().enumerate() {
        ordered[assignment.labels[med] - 1] = med;
        debug_assert_eq!(labels[med], c);
    }
    Ok(KMedoidsFit {
        assignment,
        medoids: ordered,
        cost,
        iterations,
    })
}
