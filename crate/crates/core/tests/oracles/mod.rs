//! Slow, direct reference implementations used as test oracles.
#![allow(dead_code)]

/// Edit distance by plain recursion; exponential, for short inputs only.
pub fn levenshtein_rec(p: &[u8], q: &[u8]) -> usize {
    match (p.split_first(), q.split_first()) {
        (None, _) => q.len(),
        (_, None) => p.len(),
        (Some((a, pr)), Some((b, qr))) => {
            let sub = levenshtein_rec(pr, qr) + usize::from(a != b);
            let del = levenshtein_rec(pr, q) + 1;
            let ins = levenshtein_rec(p, qr) + 1;
            sub.min(del).min(ins)
        }
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Movement distance straight from the per-step definition.
pub fn mpbd_naive(p: &[f64], q: &[f64], omega: f64) -> f64 {
    let mut total = 0.0;
    for t in 0..p.len() - 1 {
        let a = p[t] - p[t + 1];
        let b = q[t] - q[t + 1];
        if a == b {
            continue;
        }
        let gap = (a - b).abs();
        total += if sign(a) == sign(b) && sign(a) != 0 {
            gap
        } else {
            omega * gap
        };
    }
    total
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn mean(points: &[&Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    (0..d)
        .map(|j| points.iter().map(|x| x[j]).sum::<f64>() / points.len() as f64)
        .collect()
}

fn groups<'a>(data: &'a [Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<&'a Vec<f64>>> {
    (1..=k)
        .map(|c| (0..data.len()).filter(|&i| labels[i] == c).map(|i| &data[i]).collect())
        .collect()
}

/// Minimum WCSS over every split into two non-empty groups.
pub fn exhaustive_two_means(data: &[Vec<f64>]) -> f64 {
    let n = data.len();
    let mut best = f64::INFINITY;
    for mask in 1..(1u32 << n) - 1 {
        let labels: Vec<usize> = (0..n).map(|i| 1 + ((mask >> i) & 1) as usize).collect();
        best = best.min(wcss_pairwise(data, &labels, 2));
    }
    best
}

/// WCSS via the pairwise identity sum_c 1/(2 n_c) sum_{i,j in c} |x_i - x_j|^2.
pub fn wcss_pairwise(data: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    groups(data, labels, k)
        .iter()
        .map(|g| {
            let mut s = 0.0;
            for a in g {
                for b in g {
                    s += sq(a, b);
                }
            }
            s / (2.0 * g.len() as f64)
        })
        .sum()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Minimum total distance to the nearest medoid over every medoid set of size k.
pub fn exhaustive_medoids(dist: &[Vec<f64>], k: usize) -> f64 {
    combinations(dist.len(), k)
        .iter()
        .map(|meds| {
            (0..dist.len())
                .map(|i| meds.iter().map(|&m| dist[i][m]).fold(f64::INFINITY, f64::min))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Standard CH: (BCSS_w / (k-1)) / (WCSS / (n-k)) with BCSS_w = total SS - WCSS.
pub fn ch_standard(data: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let n = data.len();
    let all: Vec<&Vec<f64>> = data.iter().collect();
    let grand = mean(&all);
    let total: f64 = data.iter().map(|x| sq(x, &grand)).sum();
    let w = wcss_pairwise(data, labels, k);
    ((total - w) / (k - 1) as f64) / (w / (n - k) as f64)
}

/// Literal ratio WCSS / sum_c |c_c - grand|^2.
pub fn ch_paper(data: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let all: Vec<&Vec<f64>> = data.iter().collect();
    let grand = mean(&all);
    let b: f64 = groups(data, labels, k).iter().map(|g| sq(&mean(g), &grand)).sum();
    wcss_pairwise(data, labels, k) / b
}

pub fn db(data: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let gs = groups(data, labels, k);
    let cents: Vec<Vec<f64>> = gs.iter().map(|g| mean(g)).collect();
    let spread: Vec<f64> = gs
        .iter()
        .zip(&cents)
        .map(|(g, c)| (g.iter().map(|x| sq(x, c)).sum::<f64>() / g.len() as f64).sqrt())
        .collect();
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i != j {
                worst = worst.max((spread[i] + spread[j]) / sq(&cents[i], &cents[j]).sqrt());
            }
        }
        total += worst;
    }
    total / k as f64
}

pub fn mpbi(series: &[Vec<f64>], labels: &[usize], k: usize, omega: f64) -> f64 {
    let mut total = 0.0;
    for c in 1..=k {
        let members: Vec<usize> = (0..series.len()).filter(|&i| labels[i] == c).collect();
        let mut s = 0.0;
        for a in 0..members.len() {
            for b in a + 1..members.len() {
                s += mpbd_naive(&series[members[a]], &series[members[b]], omega);
            }
        }
        total += s / members.len() as f64;
    }
    total / k as f64
}

/// Agglomerative clustering of points, recomputing every cluster distance
/// from its definition at each step. Returns merge heights and the member
/// sets after each merge.
pub fn naive_linkage(points: &[Vec<f64>], linkage: &str) -> Vec<(f64, Vec<Vec<usize>>)> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    let d = |a: &[usize], b: &[usize]| -> f64 {
        let pair = |i: usize, j: usize| sq(&points[i], &points[j]).sqrt();
        match linkage {
            "single" => a
                .iter()
                .flat_map(|&i| b.iter().map(move |&j| pair(i, j)))
                .fold(f64::INFINITY, f64::min),
            "complete" => a
                .iter()
                .flat_map(|&i| b.iter().map(move |&j| pair(i, j)))
                .fold(0.0, f64::max),
            "average" => {
                a.iter().flat_map(|&i| b.iter().map(move |&j| pair(i, j))).sum::<f64>() / (a.len() * b.len()) as f64
            }
            "ward" => {
                let ca = mean(&a.iter().map(|&i| &points[i]).collect::<Vec<_>>());
                let cb = mean(&b.iter().map(|&i| &points[i]).collect::<Vec<_>>());
                let (na, nb) = (a.len() as f64, b.len() as f64);
                (2.0 * na * nb / (na + nb) * sq(&ca, &cb)).sqrt()
            }
            other => panic!("unknown linkage {other}"),
        }
    };
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let v = d(&clusters[i], &clusters[j]);
                if v < best.2 {
                    best = (i, j, v);
                }
            }
        }
        let merged = clusters.remove(best.1);
        clusters[best.0].extend(merged);
        clusters[best.0].sort_unstable();
        let mut snapshot = clusters.clone();
        snapshot.sort();
        out.push((best.2, snapshot));
    }
    out
}
