//! Small numeric helpers shared by the learners.

/// Numerically stable softmax of log-weights.
pub(crate) fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Log-weights never trail the leader by more than this, so that the
/// exponentiated weights stay well inside the normal floating-point range.
pub(crate) const LOG_WEIGHT_SPREAD: f64 = 700.0;

/// Fixed-Share mixing `w <- (1 - alpha) w + alpha * mean(w)` in log space,
/// followed by re-centring and the spread floor.
pub(crate) fn share_and_recenter(log_weights: &mut [f64], alpha: f64) {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if alpha > 0.0 {
        let weights: Vec<f64> = log_weights.iter().map(|w| (w - max).exp()).collect();
        let mean = weights.iter().sum::<f64>() / weights.len() as f64;
        for (lw, w) in log_weights.iter_mut().zip(weights) {
            *lw = ((1.0 - alpha) * w + alpha * mean).ln();
        }
    } else {
        for lw in log_weights.iter_mut() {
            *lw -= max;
        }
    }
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for lw in log_weights.iter_mut() {
        *lw = (*lw - max).max(-LOG_WEIGHT_SPREAD);
    }
}

/// Index of the largest entry, ties broken by the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Draw an index from a probability vector using one uniform variate.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `acc` a hair below 1; fall back to the last positive entry.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
