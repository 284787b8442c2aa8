//! Regression-based contextual primal: plug-in Lagrange estimates from one
//! oracle per outcome coordinate, played through inverse gap weighting.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::env::InstanceSpec;
use crate::lagrangian::LagrangeParams;
use crate::orchestrator::{PrimalAlgorithm, PrimalDecision, RunLog};
use crate::regression::{AnyOracle, DirectLagrangeOracle, RegressionOracle};
use crate::util::{argmax, sample_index};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    BinarySearch,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IgwConfig {
    pub gamma: f64,
    pub normalization: Normalization,
    pub bisection_tolerance: f64,
}

impl IgwConfig {
    pub fn new(gamma: f64, normalization: Normalization) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self {
            gamma,
            normalization,
            bisection_tolerance: 1e-10,
        })
    }
}

/// `L̂(a) = f̂₁(x,a) + η Σ_i σ_i λ_i (1 − (T/B) f̂_{i+1}(x,a))` for every arm.
pub fn estimate_lagrange<O: RegressionOracle>(
    oracles: &[O],
    context: usize,
    num_arms: usize,
    lambda: &[f64],
    params: &LagrangeParams,
    signs: &[f64],
) -> Result<Vec<f64>> {
    (0..num_arms)
        .map(|a| {
            let mut row = Vec::with_capacity(oracles.len());
            for o in oracles {
                row.push(o.predict(context, a)?);
            }
            Ok(crate::lagrangian::payoff_unchecked(&row, lambda, params, signs))
        })
        .collect()
}

/// Sum of `1/(c + γ gap(a))` over arms, with `gap(a) = max L̂ − L̂(a)`.
fn igw_mass(gaps: &[f64], gamma: f64, c: f64) -> f64 {
    gaps.iter().map(|g| 1.0 / (c + gamma * g)).sum()
}

/// Bisection for the normaliser `c ∈ [1, K]`; also returns the unnormalised
/// mass at the root.
pub fn igw_normalizer(estimates: &[f64], config: &IgwConfig) -> Result<(f64, f64)> {
    let gaps = gaps(estimates)?;
    let k = estimates.len() as f64;
    let (mut lo, mut hi) = (1.0, k);
    while hi - lo > config.bisection_tolerance {
        let mid = 0.5 * (lo + hi);
        if igw_mass(&gaps, config.gamma, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    Ok((c, igw_mass(&gaps, config.gamma, c)))
}

fn gaps(estimates: &[f64]) -> Result<Vec<f64>> {
    if let Some(arm) = estimates.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEstimate { arm });
    }
    let best = estimates[argmax(estimates)];
    Ok(estimates.iter().map(|v| best - v).collect())
}

/// Inverse-gap-weighting distribution over arms.
pub fn igw_distribution(estimates: &[f64], config: &IgwConfig) -> Result<Vec<f64>> {
    let k = estimates.len();
    if k == 0 {
        return Err(Error::InvalidParameter("no arms".into()));
    }
    let gaps = gaps(estimates)?;
    match config.normalization {
        Normalization::BinarySearch => {
            let (c, mass) = igw_normalizer(estimates, config)?;
            Ok(gaps.iter().map(|g| 1.0 / (c + config.gamma * g) / mass).collect())
        }
        Normalization::ClosedForm => {
            let best = argmax(estimates);
            let mut p: Vec<f64> = gaps.iter().map(|g| 1.0 / (k as f64 + config.gamma * g)).collect();
            let rest: f64 = p.iter().enumerate().filter(|&(a, _)| a != best).map(|(_, v)| v).sum();
            p[best] = 1.0 - rest;
            debug_assert!(p[best] >= 1.0 / k as f64 - 1e-12);
            Ok(p)
        }
    }
}

/// `γ = (B/T) √((K T/(d+1)) / U)`.
pub fn squarecb_gamma(
    budget: f64,
    horizon: usize,
    num_arms: usize,
    num_resources: usize,
    regression_bound: f64,
) -> f64 {
    let t = horizon as f64;
    budget / t * ((num_arms as f64 * t / (num_resources as f64 + 1.0)) / regression_bound).sqrt()
}

/// Regression bound for a finite class of size `class_size` per oracle,
/// union-bounded over the `d + 1` oracles: `ln|F| + ln(2(d+1)/δ)`.
pub fn finite_class_bound(class_size: usize, num_resources: usize, delta: f64) -> f64 {
    (class_size as f64).ln() + (2.0 * (num_resources as f64 + 1.0) / delta).ln()
}

/// Where the plug-in estimates come from.
#[derive(Debug, Clone)]
pub enum Estimator {
    /// One oracle per outcome coordinate (reward first).
    PerCoordinate(Vec<AnyOracle>),
    /// A single oracle on the Lagrange payoff.
    Direct(DirectLagrangeOracle),
}

/// The regression-based primal learner.
#[derive(Debug, Clone)]
pub struct SquareCbPrimal {
    pub estimator: Estimator,
    pub igw: IgwConfig,
    pub params: LagrangeParams,
    pub signs: Vec<f64>,
    pub num_arms: usize,
    last_lambda: Vec<f64>,
}

impl SquareCbPrimal {
    pub fn new(
        estimator: Estimator,
        igw: IgwConfig,
        params: LagrangeParams,
        signs: Vec<f64>,
        num_arms: usize,
    ) -> Result<Self> {
        if let Estimator::PerCoordinate(o) = &estimator {
            if o.len() != signs.len() + 1 {
                return Err(Error::InvalidParameter(format!(
                    "need {} oracles, got {}",
                    signs.len() + 1,
                    o.len()
                )));
            }
        }
        Ok(Self {
            estimator,
            igw,
            params,
            last_lambda: vec![0.0; signs.len()],
            signs,
            num_arms,
        })
    }

    pub fn estimates(&mut self, context: usize, lambda: &[f64]) -> Result<Vec<f64>> {
        match &mut self.estimator {
            Estimator::PerCoordinate(o) => {
                estimate_lagrange(o, context, self.num_arms, lambda, &self.params, &self.signs)
            }
            Estimator::Direct(o) => (0..self.num_arms).map(|a| o.predict(context, a, lambda)).collect(),
        }
    }
}

impl PrimalAlgorithm for SquareCbPrimal {
    fn decide(&mut self, context: usize, lambda: &[f64], rng: &mut dyn RngCore) -> Result<PrimalDecision> {
        let est = self.estimates(context, lambda)?;
        let p = igw_distribution(&est, &self.igw)?;
        let arm = sample_index(&p, rng.random());
        let predictions = match &self.estimator {
            Estimator::PerCoordinate(o) => Some(o.iter().map(|o| o.predict(context, arm)).collect::<Result<Vec<_>>>()?),
            Estimator::Direct(_) => None,
        };
        self.last_lambda = lambda.to_vec();
        Ok(PrimalDecision {
            arm,
            distribution: Some(p),
            predictions,
            lagrange_estimate: Some(est[arm]),
        })
    }

    fn observe(&mut self, context: usize, arm: usize, outcome: &[f64], payoff: f64) -> Result<()> {
        match &mut self.estimator {
            Estimator::PerCoordinate(oracles) => {
                for (o, &y) in oracles.iter_mut().zip(outcome) {
                    o.observe(context, arm, y)?;
                }
                Ok(())
            }
            Estimator::Direct(o) => o.observe(context, arm, &self.last_lambda, payoff),
        }
    }
}

/// Squared error of the composed Lagrange estimate at the played arm,
/// `Σ_t (L̂_t(x_t, a_t) − L*_t(x_t, a_t))²`, with `L*` the expected payoff
/// under the segment-correct (reported) means.
pub fn lagrange_oracle_error(log: &RunLog, spec: &InstanceSpec) -> f64 {
    let mut total = 0.0;
    for rec in log.active_rounds() {
        let Some(est) = rec.lagrange_estimate else { continue };
        let model = &spec.segments[spec.segment_index(rec.round)].model;
        let mut mean = Vec::with_capacity(log.signs.len() + 1);
        mean.push(model.reward[rec.context][rec.arm]);
        for (c, s) in model.consumption[rec.context][rec.arm].iter().zip(&log.reported_shift) {
            mean.push(c - s);
        }
        let truth = crate::lagrangian::payoff_unchecked(&mean, &rec.lambda, &log.params, &log.signs);
        total += (est - truth) * (est - truth);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::FiniteClassOracle;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(gamma: f64, mode: Normalization) -> IgwConfig {
        IgwConfig::new(gamma, mode).unwrap()
    }

    #[test]
    fn equal_estimates_are_uniform() {
        for mode in [Normalization::BinarySearch, Normalization::ClosedForm] {
            let p = igw_distribution(&[0.4, 0.4, 0.4], &cfg(10.0, mode)).unwrap();
            for v in p {
                assert_relative_eq!(v, 1.0 / 3.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn golden_ratio_normalizer() {
        let c = cfg(1.0, Normalization::BinarySearch);
        let (cn, _) = igw_normalizer(&[1.0, 0.0], &c).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((cn - phi).abs() < 1e-6);
        let p = igw_distribution(&[1.0, 0.0], &c).unwrap();
        assert!((p[0] - 0.6180).abs() < 1e-4);
        assert!((p[1] - 0.3820).abs() < 1e-4);
    }

    #[test]
    fn tiny_gamma_is_nearly_uniform() {
        let p = igw_distribution(&[1.0, 0.0, -3.0], &cfg(1e-12, Normalization::BinarySearch)).unwrap();
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            igw_distribution(&[1.0, f64::NAN], &cfg(1.0, Normalization::BinarySearch)),
            Err(Error::NonFiniteEstimate { arm: 1 })
        ));
    }

    #[test]
    fn gamma_formula() {
        assert_relative_eq!(squarecb_gamma(100.0, 100, 2, 1, 100.0), 1.0, epsilon = 1e-15);
        let g1 = squarecb_gamma(50.0, 100, 3, 2, 7.0);
        let g2 = squarecb_gamma(50.0, 100, 3, 2, 14.0);
        assert_relative_eq!(g1 / g2, 2f64.sqrt(), epsilon = 1e-12);
        assert!(squarecb_gamma(50.0, 100, 3, 2, 1e300) < 1e-140);
    }

    #[test]
    fn plug_in_example() {
        let p = LagrangeParams::new(2.0, 2.0).unwrap();
        let oracles = vec![
            FiniteClassOracle::new(vec![vec![vec![0.3]]], 0.0, 1.0).unwrap(),
            FiniteClassOracle::new(vec![vec![vec![0.1]]], -1.0, 1.0).unwrap(),
        ];
        let est = estimate_lagrange(&oracles, 0, 1, &[1.0], &p, &[1.0]).unwrap();
        assert_relative_eq!(est[0], 1.9, epsilon = 1e-12);
    }

    #[test]
    fn huge_gamma_concentrates_on_argmax() {
        let gamma = 1e6;
        let est = [0.0, 1.0, 0.5];
        let p = igw_distribution(&est, &cfg(gamma, Normalization::BinarySearch)).unwrap();
        // each other arm receives at most 1/(1 + γ·gap)
        let bound = 1.0 - (1.0 / (1.0 + gamma) + 1.0 / (1.0 + 0.5 * gamma));
        assert!(p[1] >= bound);
    }

    proptest! {
        #[test]
        fn normalization_invariants(est in proptest::collection::vec(-5.0f64..5.0, 2..8), gamma in 0.01f64..1e4) {
            let k = est.len();
            let bs = cfg(gamma, Normalization::BinarySearch);
            let (_, mass) = igw_normalizer(&est, &bs).unwrap();
            prop_assert!((mass - 1.0).abs() <= k as f64 * bs.bisection_tolerance);
            let p = igw_distribution(&est, &bs).unwrap();
            let q = igw_distribution(&est, &cfg(gamma, Normalization::ClosedForm)).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|&v| v > 0.0));
            let best = argmax(&est);
            prop_assert!(p[best] >= 1.0 / k as f64 - 1e-12);
            prop_assert!(q[best] >= 1.0 / k as f64 - 1e-12);
            prop_assert_eq!(argmax(&p), best);
            prop_assert_eq!(argmax(&q), best);
            for a in 0..k {
                for b in 0..k {
                    if est[a] < est[b] {
                        prop_assert!(p[a] <= p[b]);
                        prop_assert!(q[a] <= q[b]);
                    }
                }
            }
        }
    }
}
