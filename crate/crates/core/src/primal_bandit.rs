//! Non-contextual adversarial bandit primals: EXP3.P and its switching
//! variant EXP3.S (EXP3.P plus Fixed-Share mixing of the weights).

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::duals::intervals;
use crate::orchestrator::{PrimalAlgorithm, PrimalDecision, RunLog};
use crate::util::{sample_index, share_and_recenter, softmax};
use crate::{Error, Result};

const RANGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvBanditState {
    pub log_weights: Vec<f64>,
    pub exploration_mix: f64,
    /// Rate applied to gain estimates of normalised payoffs.
    pub learning_rate: f64,
    pub bonus_rate: f64,
    pub share_alpha: f64,
    pub last_distribution: Vec<f64>,
    pub payoff_lo: f64,
    pub payoff_hi: f64,
}

/// EXP3.P over `K` arms for payoffs in `[0, range_width]`.
///
/// With a switch hint `S` this becomes EXP3.S: weights are shared at rate
/// `S/(T−1)` and exploration follows the switching tuning
/// `γ = min(1, √(K (S ln(KT) + e) / ((e − 1) T)))`, without which the shared
/// weights recover from a switch no faster than plain EXP3.P.
pub fn adv_bandit_init(
    num_arms: usize,
    horizon: usize,
    delta: f64,
    range_width: f64,
    num_switches_hint: Option<usize>,
) -> AdvBanditState {
    assert!(num_arms >= 2, "need at least two arms");
    assert!(range_width > 0.0, "range width must be positive");
    assert!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    let k = num_arms as f64;
    let t = horizon.max(2) as f64;
    let gamma = match num_switches_hint {
        None => (k * k.ln() / t).sqrt(),
        Some(s) => exp3s_gamma(num_arms, horizon, s),
    }
    .min(1.0);
    let share_alpha = num_switches_hint.map_or(0.0, |s| (s as f64 / (t - 1.0)).min(1.0));
    let learning_rate = if num_switches_hint.is_some() {
        gamma / k
    } else {
        gamma / (2.0 * k)
    };
    AdvBanditState {
        log_weights: vec![0.0; num_arms],
        exploration_mix: gamma,
        learning_rate,
        bonus_rate: ((k / delta).ln() / (k * t)).sqrt(),
        share_alpha,
        last_distribution: vec![1.0 / k; num_arms],
        payoff_lo: 0.0,
        payoff_hi: range_width,
    }
}

/// Exploration rate of EXP3.S for `S` switches.
pub fn exp3s_gamma(num_arms: usize, horizon: usize, num_switches: usize) -> f64 {
    let k = num_arms as f64;
    let t = horizon.max(2) as f64;
    let e = std::f64::consts::E;
    (k * (num_switches as f64 * (k * t).ln() + e) / ((e - 1.0) * t))
        .sqrt()
        .min(1.0)
}

impl AdvBanditState {
    pub fn for_range(
        num_arms: usize,
        horizon: usize,
        delta: f64,
        lo: f64,
        hi: f64,
        num_switches_hint: Option<usize>,
    ) -> Self {
        let mut s = adv_bandit_init(num_arms, horizon, delta, hi - lo, num_switches_hint);
        s.payoff_lo = lo;
        s.payoff_hi = hi;
        s
    }

    /// Override the sharing rate (e.g. `1/T` for EXP3.S without a hint).
    pub fn with_share_alpha(mut self, alpha: f64) -> Self {
        self.share_alpha = alpha.clamp(0.0, 1.0);
        self
    }

    pub fn num_arms(&self) -> usize {
        self.log_weights.len()
    }

    fn refresh_distribution(&mut self) {
        let k = self.num_arms() as f64;
        let g = self.exploration_mix;
        self.last_distribution = softmax(&self.log_weights)
            .into_iter()
            .map(|w| (1.0 - g) * w + g / k)
            .collect();
        debug_assert!(self.last_distribution.iter().all(|&p| p >= g / k * (1.0 - 1e-12)));
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.last_distribution, rng.random())
    }

    /// Importance-weighted exponential update after playing `arm`.
    pub fn update(&mut self, arm: usize, payoff: f64) -> Result<()> {
        if arm >= self.num_arms() {
            return Err(Error::UnknownIndex { context: 0, arm });
        }
        if !(payoff >= self.payoff_lo - RANGE_TOL && payoff <= self.payoff_hi + RANGE_TOL) {
            return Err(Error::OutOfRange {
                value: payoff,
                lo: self.payoff_lo,
                hi: self.payoff_hi,
            });
        }
        let x = ((payoff - self.payoff_lo) / (self.payoff_hi - self.payoff_lo)).clamp(0.0, 1.0);
        for (a, (lw, &p)) in self.log_weights.iter_mut().zip(&self.last_distribution).enumerate() {
            let hit = if a == arm { x } else { 0.0 };
            *lw += self.learning_rate * (hit + self.bonus_rate) / p;
        }
        share_and_recenter(&mut self.log_weights, self.share_alpha);
        self.refresh_distribution();
        Ok(())
    }
}

impl PrimalAlgorithm for AdvBanditState {
    fn decide(&mut self, _context: usize, _lambda: &[f64], rng: &mut dyn RngCore) -> Result<PrimalDecision> {
        let arm = self.sample(rng);
        Ok(PrimalDecision {
            arm,
            distribution: Some(self.last_distribution.clone()),
            predictions: None,
            lagrange_estimate: None,
        })
    }

    fn observe(&mut self, _context: usize, arm: usize, _outcome: &[f64], payoff: f64) -> Result<()> {
        self.update(arm, payoff)
    }
}

/// Interval-summed regret against the best fixed arm (`contexts = None`) or
/// the best fixed policy (`contexts = Some`), from counterfactual payoffs
/// `Lag_t(a, λ_t)` and realised payoffs `Lag_t(a_t, λ_t)`.
pub fn primal_regret_from_payoffs(
    counterfactual: &[Vec<f64>],
    realized: &[f64],
    contexts: Option<&[usize]>,
    switches: &[usize],
) -> f64 {
    let mut total = 0.0;
    for (start, end) in intervals(realized.len(), switches) {
        if end <= start {
            continue;
        }
        let k = counterfactual[start].len();
        let num_contexts = contexts.map_or(1, |c| c[start..end].iter().max().map_or(1, |m| m + 1));
        let mut sums = vec![vec![0.0; k]; num_contexts];
        for t in start..end {
            let x = contexts.map_or(0, |c| c[t]);
            for (s, v) in sums[x].iter_mut().zip(&counterfactual[t]) {
                *s += v;
            }
        }
        let best: f64 = sums
            .iter()
            .filter(|row| row.iter().any(|&v| v != 0.0))
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .sum();
        let got: f64 = realized[start..end].iter().sum();
        total += best - got;
    }
    total
}

/// Regret against the best fixed arm on each interval.
pub fn realized_primal_regret_noncontextual(log: &RunLog, switches: &[usize]) -> f64 {
    let rounds = log.active_rounds();
    let cf: Vec<Vec<f64>> = rounds.iter().map(|r| log.counterfactual_payoffs(r)).collect();
    let real: Vec<f64> = rounds.iter().map(|r| r.payoff).collect();
    primal_regret_from_payoffs(&cf, &real, None, switches)
}

/// Regret against the best fixed policy (context-to-arm map) on each interval.
pub fn realized_primal_regret_contextual(log: &RunLog, switches: &[usize]) -> f64 {
    let rounds = log.active_rounds();
    let cf: Vec<Vec<f64>> = rounds.iter().map(|r| log.counterfactual_payoffs(r)).collect();
    let real: Vec<f64> = rounds.iter().map(|r| r.payoff).collect();
    let ctx: Vec<usize> = rounds.iter().map(|r| r.context).collect();
    primal_regret_from_payoffs(&cf, &real, Some(&ctx), switches)
}
