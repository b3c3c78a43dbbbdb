//! Pairwise distances between two sequences.

use crate::error::DistanceError;

/// Default weight applied to steps where the two series disagree in direction.
pub const DEFAULT_OMEGA: f64 = 2.0;

/// l2 distance over aligned positions.
pub fn euclidean(p: &[f64], q: &[f64]) -> Result<f64, DistanceError> {
    if p.len() != q.len() {
        return Err(DistanceError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(p.iter().zip(q).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt())
}

/// Unit-cost edit distance (insert, delete, substitute).
pub fn levenshtein<T: PartialEq>(p: &[T], q: &[T]) -> usize {
    if p.is_empty() {
        return q.len();
    }
    if q.is_empty() {
        return p.len();
    }
    let mut prev: Vec<usize> = (0..=q.len()).collect();
    let mut curr = vec![0; q.len() + 1];
    for (i, a) in p.iter().enumerate() {
        curr[0] = i + 1;
        for (j, b) in q.iter().enumerate() {
            curr[j + 1] = if a == b {
                prev[j]
            } else {
                1 + prev[j].min(prev[j + 1]).min(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[q.len()]
}

/// Edit distance divided by the longer length; 0 when both are empty.
pub fn normalized_levenshtein<T: PartialEq>(p: &[T], q: &[T]) -> f64 {
    let longest = p.len().max(q.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(p, q) as f64 / longest as f64
}

/// Dynamic time warping with squared local cost and a final square root.
///
/// `window` is a Sakoe-Chiba half-width on `|i - j|`; `None` is unconstrained.
pub fn dtw(p: &[f64], q: &[f64], window: Option<usize>) -> Result<f64, DistanceError> {
    let (n, m) = (p.len(), q.len());
    if n == 0 || m == 0 {
        return Err(DistanceError::TooShort { len: n.min(m), min: 1 });
    }
    let diff = n.abs_diff(m);
    let w = match window {
        Some(w) if w < diff => return Err(DistanceError::WindowTooSmall { window: w, diff }),
        Some(w) => w,
        None => n.max(m),
    };

    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        curr.fill(f64::INFINITY);
        let lo = i.saturating_sub(w).max(1);
        let hi = (i + w).min(m);
        for j in lo..=hi {
            let d = p[i - 1] - q[j - 1];
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = d * d + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m].sqrt())
}

/// Successive differences `x[t] - x[t+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSequence(pub Vec<f64>);

impl DeltaSequence {
    pub fn of<T: Copy + Into<f64>>(x: &[T]) -> Self {
        DeltaSequence(x.windows(2).map(|w| w[0].into() - w[1].into()).collect())
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

/// Cost of one aligned pair of movements.
///
/// Equal moves cost nothing; same-direction moves cost the magnitude gap;
/// anything else (opposite moves, or one series flat while the other moves)
/// costs `omega` times the gap.
pub fn step_cost(a: f64, b: f64, omega: f64) -> f64 {
    if a == b {
        0.0
    } else if sign(a) == sign(b) {
        (a - b).abs()
    } else {
        omega * (a - b).abs()
    }
}

/// Movement pattern-based distance: sum of [`step_cost`] over aligned deltas.
///
/// Works on numeric values or symbol levels alike.
pub fn mpbd<T: Copy + Into<f64>>(p: &[T], q: &[T], omega: f64) -> Result<f64, DistanceError> {
    if p.len() != q.len() {
        return Err(DistanceError::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if p.len() < 2 {
        return Err(DistanceError::TooShort { len: p.len(), min: 2 });
    }
    let mut total = 0.0;
    for (wp, wq) in p.windows(2).zip(q.windows(2)) {
        let dp = wp[0].into() - wp[1].into();
        let dq = wq[0].into() - wq[1].into();
        total += step_cost(dp, dq, omega);
    }
    Ok(total)
}
