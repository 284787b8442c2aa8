//! Full-feedback dual learners over resources: Hedge and Fixed-Share.
//!
//! The dual minimises the Lagrange payoff, so each resource's weight decays
//! exponentially in its cumulative payoff. Fixed-Share additionally mixes a
//! fraction `α` of the total weight back uniformly after every step, which
//! lets it track a comparator that switches between resources.

use serde::{Deserialize, Serialize};

use crate::util::{share_and_recenter, softmax};
use crate::{Error, Result};

const RANGE_TOL: f64 = 1e-9;

/// Anything that emits a dual distribution and learns from per-resource costs.
pub trait DualAlgorithm {
    fn lambda(&self) -> Vec<f64>;
    fn observe_costs(&mut self, costs: &[f64]) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub log_weights: Vec<f64>,
    /// Rate per raw cost unit: `√(8 ln d / T) / (hi − lo)`.
    pub learning_rate: f64,
    pub share_alpha: f64,
    pub cumulative_cost: Vec<f64>,
    pub cost_lo: f64,
    pub cost_hi: f64,
}

/// Uniform Hedge (no hint) or Fixed-Share (`α = S/(T−1)`) over `d`
/// resources, for costs in a range of width `range_width` starting at 0.
pub fn dual_init(d: usize, horizon: usize, range_width: f64, num_switches_hint: Option<usize>) -> DualState {
    assert!(d >= 1, "need at least one resource");
    assert!(range_width > 0.0, "range width must be positive");
    let t = horizon.max(2) as f64;
    let share_alpha = num_switches_hint.map_or(0.0, |s| (s as f64 / (t - 1.0)).min(1.0));
    DualState {
        log_weights: vec![0.0; d],
        learning_rate: (8.0 * (d as f64).ln() / t).sqrt() / range_width,
        share_alpha,
        cumulative_cost: vec![0.0; d],
        cost_lo: 0.0,
        cost_hi: range_width,
    }
}

impl DualState {
    /// Hedge/Fixed-Share sized for costs in `[lo, hi]`.
    pub fn for_range(d: usize, horizon: usize, lo: f64, hi: f64, num_switches_hint: Option<usize>) -> Self {
        let mut s = dual_init(d, horizon, hi - lo, num_switches_hint);
        s.cost_lo = lo;
        s.cost_hi = hi;
        s
    }

    /// Override the sharing rate (e.g. `1/T` when the switch count is unknown).
    pub fn with_share_alpha(mut self, alpha: f64) -> Self {
        self.share_alpha = alpha.clamp(0.0, 1.0);
        self
    }

    pub fn is_hedge(&self) -> bool {
        self.share_alpha == 0.0
    }

    pub fn distribution(&self) -> Vec<f64> {
        softmax(&self.log_weights)
    }

    /// One exponential-weights step followed by Fixed-Share mixing.
    pub fn step(&mut self, costs: &[f64]) -> Result<()> {
        if costs.len() != self.log_weights.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} costs, got {}",
                self.log_weights.len(),
                costs.len()
            )));
        }
        for &c in costs {
            if !(c >= self.cost_lo - RANGE_TOL && c <= self.cost_hi + RANGE_TOL) {
                return Err(Error::OutOfRange {
                    value: c,
                    lo: self.cost_lo,
                    hi: self.cost_hi,
                });
            }
        }
        for ((lw, cum), &c) in self.log_weights.iter_mut().zip(&mut self.cumulative_cost).zip(costs) {
            *lw -= self.learning_rate * (c - self.cost_lo);
            *cum += c;
        }
        share_and_recenter(&mut self.log_weights, self.share_alpha);
        Ok(())
    }
}

/// Functional form of [`DualState::step`].
pub fn dual_step(mut state: DualState, costs: &[f64]) -> Result<DualState> {
    state.step(costs)?;
    Ok(state)
}

impl DualAlgorithm for DualState {
    fn lambda(&self) -> Vec<f64> {
        self.distribution()
    }

    fn observe_costs(&mut self, costs: &[f64]) -> Result<()> {
        self.step(costs)
    }
}

/// Interval-summed dual regret.
///
/// `realized[t]` is the payoff `Lag_t(a_t, λ_t)` and `per_resource[t][i]` is
/// `Lag_t(a_t, e_i)`, both indexed from round 1 at position 0. `switches`
/// lists the first round of each interval after the first.
pub fn dual_regret_from_payoffs(realized: &[f64], per_resource: &[Vec<f64>], switches: &[usize]) -> f64 {
    let mut total = 0.0;
    for (start, end) in intervals(realized.len(), switches) {
        let d = per_resource.get(start).map_or(0, Vec::len);
        let got: f64 = realized[start..end].iter().sum();
        let best = (0..d)
            .map(|i| per_resource[start..end].iter().map(|row| row[i]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        if end > start {
            total += got - best;
        }
    }
    total
}

/// Dual regret of a logged run over the intervals defined by `switches`.
pub fn realized_dual_regret(log: &crate::orchestrator::RunLog, switches: &[usize]) -> f64 {
    let rounds = log.active_rounds();
    let realized: Vec<f64> = rounds.iter().map(|r| r.payoff).collect();
    let per: Vec<Vec<f64>> = rounds.iter().map(|r| r.per_resource_payoffs.clone()).collect();
    dual_regret_from_payoffs(&realized, &per, switches)
}

/// Half-open 0-based index ranges for the intervals of an `n`-round run
/// split at the 1-based `switches`.
pub(crate) fn intervals(n: usize, switches: &[usize]) -> Vec<(usize, usize)> {
    let mut cuts: Vec<usize> = switches
        .iter()
        .map(|&s| s.saturating_sub(1).min(n))
        .filter(|&s| s > 0)
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut prev = 0;
    for c in cuts {
        out.push((prev, c));
        prev = c;
    }
    out.push((prev, n));
    out
}
