//! Lagrange payoffs exchanged by the primal and dual learners, and the
//! expected (rescaled) Lagrangian of the LP benchmark.
//!
//! The dual vector always lives on the simplex; the scale `η` is applied
//! inside the payoff rather than by rescaling rewards.

use serde::{Deserialize, Serialize};

use crate::env::{InstanceSpec, Noise, OutcomeModel};
use crate::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-12;

/// Scale and range of the Lagrange payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangeParams {
    pub eta: f64,
    /// `T / B`.
    pub ratio: f64,
    /// `η · T / B`.
    pub eta_prime: f64,
    pub payoff_lo: f64,
    pub payoff_hi: f64,
}

impl LagrangeParams {
    /// Parameters with the generic range for consumptions in `[-1, 1]`.
    pub fn new(eta: f64, ratio: f64) -> Result<Self> {
        Self::with_consumption_bound(eta, ratio, 1.0)
    }

    /// Parameters whose range covers consumptions of magnitude at most `cmax`.
    pub fn with_consumption_bound(eta: f64, ratio: f64, cmax: f64) -> Result<Self> {
        if !(eta >= 1.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be >= 1, got {eta}")));
        }
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!("T/B must be positive, got {ratio}")));
        }
        if !(cmax >= 0.0 && cmax.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "consumption bound must be >= 0, got {cmax}"
            )));
        }
        let slack = eta * (1.0 + ratio * cmax);
        Ok(Self {
            eta,
            ratio,
            eta_prime: eta * ratio,
            payoff_lo: -slack,
            payoff_hi: 1.0 + slack,
        })
    }

    /// Narrow the range to what `spec` can actually produce when resource
    /// `i` is reported as `c_i − shift[i]`.
    ///
    /// Each resource contributes a penalty term `η σ_i (1 − (T/B) c_i)` whose
    /// range follows from the support of `c_i` (means plus noise family).
    /// Payoffs mix these terms with simplex weights, so the overall range is
    /// spanned by the extreme per-resource terms plus the reward range.
    pub fn tightened_for(self, spec: &InstanceSpec, shift: &[f64]) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, res) in spec.constraints.resources.iter().enumerate() {
            let (cmin, cmax) = consumption_support(spec, i);
            let s_i = shift.get(i).copied().unwrap_or(0.0);
            let (cmin, cmax) = (cmin - s_i, cmax - s_i);
            let s = res.sign.value();
            let a = self.eta * s * (1.0 - self.ratio * cmin);
            let b = self.eta * s * (1.0 - self.ratio * cmax);
            lo = lo.min(a.min(b));
            hi = hi.max(a.max(b));
        }
        let (rmin, rmax) = reward_support(spec);
        Self {
            payoff_lo: (rmin + lo).max(self.payoff_lo),
            payoff_hi: (rmax + hi).min(self.payoff_hi),
            ..self
        }
    }

    pub fn width(&self) -> f64 {
        self.payoff_hi - self.payoff_lo
    }

    pub fn contains(&self, payoff: f64) -> bool {
        payoff >= self.payoff_lo - 1e-9 && payoff <= self.payoff_hi + 1e-9
    }
}

fn coordinate_support(spec: &InstanceSpec, coordinate: usize, lo: f64) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for seg in &spec.segments {
        let noise = seg.model.noise_for(coordinate);
        for x in 0..spec.num_contexts {
            for a in 0..spec.num_arms {
                let m = seg.model.mean(x, a, coordinate);
                let (l, h) = match noise {
                    Noise::Deterministic => (m, m),
                    Noise::TruncatedGaussian { std: 0.0 } => (m, m),
                    Noise::TruncatedGaussian { .. } => (lo, 1.0),
                    Noise::Bernoulli if m >= 0.0 => (0.0, if m > 0.0 { 1.0 } else { 0.0 }),
                    Noise::Bernoulli => (-1.0, 0.0),
                };
                min = min.min(l);
                max = max.max(h);
            }
        }
    }
    (min, max)
}

fn consumption_support(spec: &InstanceSpec, resource: usize) -> (f64, f64) {
    if spec.constraints.resources[resource].is_time {
        let v = spec.segments[0].model.mean(0, 0, resource + 1);
        return (v, v);
    }
    coordinate_support(spec, resource + 1, -1.0)
}

fn reward_support(spec: &InstanceSpec) -> (f64, f64) {
    coordinate_support(spec, 0, 0.0)
}

/// How `η` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EtaMode {
    /// `η = 2/ζ` for a known Slater margin.
    Slater { zeta: f64 },
    /// `η = max(1, (B/T)·√(T/R))` from a combined-regret estimate `R`.
    General { regret_estimate: f64 },
    /// `η = 1`.
    HardStop,
    /// `η = 4/ζ`.
    ZeroViolation { zeta: f64 },
    /// A user-chosen `η ≥ 1`.
    Fixed { eta: f64 },
}

pub fn choose_eta(mode: EtaMode, budget: f64, horizon: usize) -> Result<LagrangeParams> {
    let t = horizon as f64;
    let eta = match mode {
        EtaMode::Slater { zeta } | EtaMode::ZeroViolation { zeta } if !(zeta > 0.0) => {
            return Err(Error::InvalidParameter(format!(
                "Slater margin must be positive, got {zeta}"
            )))
        }
        EtaMode::Slater { zeta } => 2.0 / zeta,
        EtaMode::ZeroViolation { zeta } => 4.0 / zeta,
        EtaMode::General { regret_estimate } => {
            if !(regret_estimate > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "regret estimate must be positive, got {regret_estimate}"
                )));
            }
            (budget / t * (t / regret_estimate).sqrt()).max(1.0)
        }
        EtaMode::HardStop => 1.0,
        EtaMode::Fixed { eta } => eta,
    };
    LagrangeParams::new(eta, t / budget)
}

fn check_simplex(lambda: &[f64]) -> Result<()> {
    let sum: f64 = lambda.iter().sum();
    let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    if (sum - 1.0).abs() > SIMPLEX_TOL || min < -SIMPLEX_TOL || !sum.is_finite() {
        return Err(Error::NotOnSimplex { sum, min });
    }
    Ok(())
}

/// `r + η Σ_i σ_i λ_i (1 − (T/B) c_i)` for any nonnegative `λ`.
pub(crate) fn payoff_unchecked(outcome: &[f64], lambda: &[f64], params: &LagrangeParams, signs: &[f64]) -> f64 {
    let penalty: f64 = lambda
        .iter()
        .zip(signs)
        .zip(&outcome[1..])
        .map(|((l, s), c)| s * l * (1.0 - params.ratio * c))
        .sum();
    outcome[0] + params.eta * penalty
}

/// Lagrange payoff of one outcome vector `(r, c_1..c_d)` under the dual
/// distribution `lambda`.
pub fn lagrange_payoff(outcome: &[f64], lambda: &[f64], params: &LagrangeParams, signs: &[f64]) -> Result<f64> {
    check_simplex(lambda)?;
    if outcome.len() != signs.len() + 1 || lambda.len() != signs.len() {
        return Err(Error::InvalidParameter("dimension mismatch".into()));
    }
    Ok(payoff_unchecked(outcome, lambda, params, signs))
}

/// Payoffs with `λ = e_i` for every resource: the dual's cost vector.
pub fn per_resource_payoffs(outcome: &[f64], params: &LagrangeParams, signs: &[f64]) -> Vec<f64> {
    signs
        .iter()
        .zip(&outcome[1..])
        .map(|(s, c)| outcome[0] + params.eta * s * (1.0 - params.ratio * c))
        .collect()
}

/// Expected payoff of arm `a` at context `x` under exact means.
pub fn expected_arm_payoff(
    model: &OutcomeModel,
    context: usize,
    arm: usize,
    lambda: &[f64],
    params: &LagrangeParams,
    signs: &[f64],
) -> f64 {
    let mut outcome = Vec::with_capacity(signs.len() + 1);
    outcome.push(model.reward[context][arm]);
    outcome.extend_from_slice(&model.consumption[context][arm]);
    payoff_unchecked(&outcome, lambda, params, signs)
}

/// `L(D, ηλ)` for a per-context arm distribution `D[x][a]` and nonnegative
/// `λ`, computed from exact means.
pub fn expected_lagrangian(
    dist: &[Vec<f64>],
    lambda: &[f64],
    model: &OutcomeModel,
    arrivals: &[f64],
    params: &LagrangeParams,
    signs: &[f64],
) -> f64 {
    let mut total = 0.0;
    for (x, (px, dx)) in arrivals.iter().zip(dist).enumerate() {
        for (a, &pa) in dx.iter().enumerate() {
            if pa != 0.0 {
                total += px * pa * expected_arm_payoff(model, x, a, lambda, params, signs);
            }
        }
    }
    total
}
