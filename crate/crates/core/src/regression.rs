//! Online regression oracles over `(context, arm)` pairs.
//!
//! Each oracle predicts a score in its declared range before the round's
//! label is revealed, then learns from the label. The harness, not the
//! oracle, measures cumulative squared error against the true means.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::env::InstanceSpec;
use crate::orchestrator::RunLog;
use crate::util::{share_and_recenter, softmax};
use crate::{Error, Result};

const RANGE_TOL: f64 = 1e-9;

/// The online regression protocol.
pub trait RegressionOracle {
    fn range(&self) -> (f64, f64);
    fn predict(&self, context: usize, arm: usize) -> Result<f64>;
    fn observe(&mut self, context: usize, arm: usize, score: f64) -> Result<()>;
}

fn check_score(score: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if score >= lo - RANGE_TOL && score <= hi + RANGE_TOL {
        Ok(())
    } else {
        Err(Error::OutOfRange { value: score, lo, hi })
    }
}

/// Exponentially weighted average over a finite class of tables `f[x][a]`.
///
/// With `share_alpha > 0` the weights are Fixed-Share mixed after every
/// update, which tracks the best switching sequence of candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteClassOracle {
    candidates: Vec<Vec<Vec<f64>>>,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    rate: f64,
    share_alpha: f64,
    lo: f64,
    hi: f64,
}

impl FiniteClassOracle {
    pub fn new(candidates: Vec<Vec<Vec<f64>>>, lo: f64, hi: f64) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidParameter("finite class is empty".into()));
        }
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!("empty range [{lo}, {hi}]")));
        }
        let shape: Vec<usize> = candidates[0].iter().map(Vec::len).collect();
        for f in &candidates {
            if f.iter().map(Vec::len).collect::<Vec<_>>() != shape {
                return Err(Error::InvalidParameter("candidate tables differ in shape".into()));
            }
            for &v in f.iter().flatten() {
                check_score(v, (lo, hi))?;
            }
        }
        let n = candidates.len();
        Ok(Self {
            candidates,
            log_weights: vec![0.0; n],
            weights: vec![1.0 / n as f64; n],
            rate: 2.0 / ((hi - lo) * (hi - lo)),
            share_alpha: 0.0,
            lo,
            hi,
        })
    }

    pub fn with_share_alpha(mut self, alpha: f64) -> Self {
        self.share_alpha = alpha.clamp(0.0, 1.0);
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    fn value(&self, f: usize, context: usize, arm: usize) -> Result<f64> {
        self.candidates[f]
            .get(context)
            .and_then(|row| row.get(arm))
            .copied()
            .ok_or(Error::UnknownIndex { context, arm })
    }
}

impl RegressionOracle for FiniteClassOracle {
    fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn predict(&self, context: usize, arm: usize) -> Result<f64> {
        let mut p = 0.0;
        for (f, w) in self.weights.iter().enumerate() {
            p += w * self.value(f, context, arm)?;
        }
        Ok(p.clamp(self.lo, self.hi))
    }

    fn observe(&mut self, context: usize, arm: usize, score: f64) -> Result<()> {
        check_score(score, self.range())?;
        for f in 0..self.candidates.len() {
            let e = self.value(f, context, arm)? - score;
            self.log_weights[f] -= self.rate * e * e;
        }
        share_and_recenter(&mut self.log_weights, self.share_alpha);
        self.weights = softmax(&self.log_weights);
        Ok(())
    }
}

/// Online ridge regression on a fixed feature map `φ(x, a)`, optionally in
/// the Vovk-Azoury-Warmuth form that folds the query's features into the
/// second-moment matrix before predicting.
#[derive(Debug, Clone)]
pub struct LinearOracle {
    features: Vec<Vec<Vec<f64>>>,
    moment: DMatrix<f64>,
    target: DVector<f64>,
    factor: Cholesky<f64, Dyn>,
    theta: DVector<f64>,
    vaw: bool,
    lo: f64,
    hi: f64,
}

impl LinearOracle {
    pub fn new(features: Vec<Vec<Vec<f64>>>, ridge: f64, vaw: bool, lo: f64, hi: f64) -> Result<Self> {
        if !(ridge > 0.0) {
            return Err(Error::InvalidParameter(format!("ridge must be positive, got {ridge}")));
        }
        let dim = features
            .first()
            .and_then(|r| r.first())
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("empty feature map".into()))?;
        for phi in features.iter().flatten() {
            if phi.len() != dim {
                return Err(Error::InvalidParameter("features differ in dimension".into()));
            }
            let norm: f64 = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter(format!("feature norm {norm} exceeds 1")));
            }
        }
        let moment = DMatrix::identity(dim, dim) * ridge;
        let factor = Cholesky::new(moment.clone()).expect("ridge identity is positive definite");
        Ok(Self {
            features,
            moment,
            target: DVector::zeros(dim),
            factor,
            theta: DVector::zeros(dim),
            vaw,
            lo,
            hi,
        })
    }

    fn phi(&self, context: usize, arm: usize) -> Result<DVector<f64>> {
        self.features
            .get(context)
            .and_then(|r| r.get(arm))
            .map(|v| DVector::from_column_slice(v))
            .ok_or(Error::UnknownIndex { context, arm })
    }

    pub fn moment_matrix(&self) -> &DMatrix<f64> {
        &self.moment
    }
}

impl RegressionOracle for LinearOracle {
    fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn predict(&self, context: usize, arm: usize) -> Result<f64> {
        let phi = self.phi(context, arm)?;
        let mut p = phi.dot(&self.theta);
        if self.vaw {
            // φᵀ(A + φφᵀ)⁻¹b = φᵀθ / (1 + φᵀA⁻¹φ)
            let leverage = phi.dot(&self.factor.solve(&phi));
            p /= 1.0 + leverage;
        }
        Ok(p.clamp(self.lo, self.hi))
    }

    fn observe(&mut self, context: usize, arm: usize, score: f64) -> Result<()> {
        check_score(score, self.range())?;
        let phi = self.phi(context, arm)?;
        self.moment += &phi * phi.transpose();
        self.target += &phi * score;
        self.factor = Cholesky::new(self.moment.clone())
            .ok_or_else(|| Error::InvalidParameter("moment matrix lost definiteness".into()))?;
        self.theta = self.factor.solve(&self.target);
        Ok(())
    }
}

/// Projected online gradient descent on square loss for a linear model.
#[derive(Debug, Clone, PartialEq)]
pub struct OgdOracle {
    features: Vec<Vec<Vec<f64>>>,
    theta: Vec<f64>,
    step0: f64,
    radius: f64,
    rounds: usize,
    lo: f64,
    hi: f64,
}

impl OgdOracle {
    pub fn new(features: Vec<Vec<Vec<f64>>>, step0: f64, radius: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(step0 > 0.0 && radius > 0.0) {
            return Err(Error::InvalidParameter("step size and radius must be positive".into()));
        }
        let dim = features
            .first()
            .and_then(|r| r.first())
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("empty feature map".into()))?;
        if features.iter().flatten().any(|phi| phi.len() != dim) {
            return Err(Error::InvalidParameter("features differ in dimension".into()));
        }
        Ok(Self {
            features,
            theta: vec![0.0; dim],
            step0,
            radius,
            rounds: 0,
            lo,
            hi,
        })
    }

    fn phi(&self, context: usize, arm: usize) -> Result<&[f64]> {
        self.features
            .get(context)
            .and_then(|r| r.get(arm))
            .map(Vec::as_slice)
            .ok_or(Error::UnknownIndex { context, arm })
    }
}

impl RegressionOracle for OgdOracle {
    fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn predict(&self, context: usize, arm: usize) -> Result<f64> {
        let phi = self.phi(context, arm)?;
        Ok(crate::util::dot(phi, &self.theta).clamp(self.lo, self.hi))
    }

    fn observe(&mut self, context: usize, arm: usize, score: f64) -> Result<()> {
        check_score(score, self.range())?;
        let phi = self.phi(context, arm)?.to_vec();
        self.rounds += 1;
        let residual = crate::util::dot(&phi, &self.theta) - score;
        let step = self.step0 / (self.rounds as f64).sqrt();
        for (t, f) in self.theta.iter_mut().zip(&phi) {
            *t -= step * 2.0 * residual * f;
        }
        let norm = self.theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > self.radius {
            for t in self.theta.iter_mut() {
                *t *= self.radius / norm;
            }
        }
        Ok(())
    }
}

/// Any of the per-coordinate oracles.
#[derive(Debug, Clone)]
pub enum AnyOracle {
    Finite(FiniteClassOracle),
    Linear(LinearOracle),
    Ogd(OgdOracle),
}

impl RegressionOracle for AnyOracle {
    fn range(&self) -> (f64, f64) {
        match self {
            AnyOracle::Finite(o) => o.range(),
            AnyOracle::Linear(o) => o.range(),
            AnyOracle::Ogd(o) => o.range(),
        }
    }

    fn predict(&self, context: usize, arm: usize) -> Result<f64> {
        match self {
            AnyOracle::Finite(o) => o.predict(context, arm),
            AnyOracle::Linear(o) => o.predict(context, arm),
            AnyOracle::Ogd(o) => o.predict(context, arm),
        }
    }

    fn observe(&mut self, context: usize, arm: usize, score: f64) -> Result<()> {
        match self {
            AnyOracle::Finite(o) => o.observe(context, arm, score),
            AnyOracle::Linear(o) => o.observe(context, arm, score),
            AnyOracle::Ogd(o) => o.observe(context, arm, score),
        }
    }
}

/// Regresses the Lagrange payoff itself, one ridge model per `(x, a)` on the
/// features `(1, λ_1, .., λ_d)`. The expected payoff is affine in `λ`, so the
/// class is realizable.
#[derive(Debug, Clone)]
pub struct DirectLagrangeOracle {
    models: Vec<Vec<LinearOracle>>,
    lo: f64,
    hi: f64,
}

impl DirectLagrangeOracle {
    pub fn new(
        num_contexts: usize,
        num_arms: usize,
        num_resources: usize,
        ridge: f64,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        // A single placeholder feature row: the λ-features are supplied per call.
        let unit = vec![vec![vec![0.0; num_resources + 1]]];
        let proto = LinearOracle::new(unit, ridge, false, lo, hi)?;
        Ok(Self {
            models: vec![vec![proto; num_arms]; num_contexts],
            lo,
            hi,
        })
    }

    fn features(lambda: &[f64]) -> Vec<f64> {
        let mut f = Vec::with_capacity(lambda.len() + 1);
        f.push(1.0);
        f.extend_from_slice(lambda);
        // keep ‖φ‖ ≤ 1: (1, λ) has norm at most √2
        f.iter().map(|v| v / std::f64::consts::SQRT_2).collect()
    }

    fn model(&mut self, context: usize, arm: usize, lambda: &[f64]) -> Result<&mut LinearOracle> {
        let m = self
            .models
            .get_mut(context)
            .and_then(|r| r.get_mut(arm))
            .ok_or(Error::UnknownIndex { context, arm })?;
        m.features[0][0] = Self::features(lambda);
        Ok(m)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn predict(&mut self, context: usize, arm: usize, lambda: &[f64]) -> Result<f64> {
        self.model(context, arm, lambda)?.predict(0, 0)
    }

    pub fn observe(&mut self, context: usize, arm: usize, lambda: &[f64], payoff: f64) -> Result<()> {
        self.model(context, arm, lambda)?.observe(0, 0, payoff)
    }
}

/// Cumulative squared prediction error per oracle, round by round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTrace {
    /// `cumulative[t][j]`: error of oracle `j` summed over rounds `1..=t+1`.
    pub cumulative: Vec<Vec<f64>>,
}

impl ErrorTrace {
    pub fn totals(&self) -> Vec<f64> {
        self.cumulative.last().cloned().unwrap_or_default()
    }
}

/// Squared error of the logged per-coordinate predictions at the played
/// `(x_t, a_t)` against the segment-correct means (as reported to the
/// learner, so shifted in zero-violation runs). Rounds without predictions
/// contribute nothing.
pub fn squared_error_trace(log: &RunLog, spec: &InstanceSpec) -> ErrorTrace {
    let width = spec.num_resources() + 1;
    let mut acc = vec![0.0; width];
    let mut cumulative = Vec::with_capacity(log.rounds.len());
    for rec in &log.rounds {
        if let Some(pred) = &rec.predictions {
            let model = &spec.segments[spec.segment_index(rec.round)].model;
            for (j, (a, p)) in acc.iter_mut().zip(pred).enumerate() {
                let mut truth = model.mean(rec.context, rec.arm, j);
                if j > 0 {
                    truth -= log.reported_shift[j - 1];
                }
                *a += (p - truth) * (p - truth);
            }
        }
        cumulative.push(acc.clone());
    }
    ErrorTrace { cumulative }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table(v: &[f64]) -> Vec<Vec<f64>> {
        vec![v.to_vec()]
    }

    #[test]
    fn singleton_class_predicts_truth() {
        let mut o = FiniteClassOracle::new(vec![table(&[0.2, 0.7])], 0.0, 1.0).unwrap();
        for _ in 0..10 {
            assert_eq!(o.predict(0, 1).unwrap(), 0.7);
            o.observe(0, 1, 1.0).unwrap();
        }
    }

    #[test]
    fn two_candidates_average() {
        let o = FiniteClassOracle::new(vec![table(&[0.0]), table(&[1.0])], 0.0, 1.0).unwrap();
        assert_eq!(o.predict(0, 0).unwrap(), 0.5);
    }

    #[test]
    fn matching_candidate_gains_weight() {
        let mut o = FiniteClassOracle::new(vec![table(&[0.3]), table(&[0.9]), table(&[0.6])], 0.0, 1.0).unwrap();
        let mut prev = o.weights()[0];
        for _ in 0..50 {
            o.observe(0, 0, 0.3).unwrap();
            assert!(o.weights()[0] >= prev);
            prev = o.weights()[0];
        }
    }

    #[test]
    fn identical_candidates_keep_equal_weights() {
        let mut o = FiniteClassOracle::new(vec![table(&[0.3]), table(&[0.3])], 0.0, 1.0).unwrap();
        for y in [0.0, 1.0, 0.4] {
            o.observe(0, 0, y).unwrap();
            assert_eq!(o.weights()[0], o.weights()[1]);
        }
    }

    #[test]
    fn finite_class_rejects_bad_input() {
        let mut o = FiniteClassOracle::new(vec![table(&[0.3])], 0.0, 1.0).unwrap();
        assert!(matches!(o.predict(1, 0), Err(Error::UnknownIndex { .. })));
        assert!(matches!(o.observe(0, 0, 1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn ridge_recursion_example() {
        let feats = vec![vec![vec![1.0]]];
        let mut ridge = LinearOracle::new(feats.clone(), 1.0, false, 0.0, 1.0).unwrap();
        let mut vaw = LinearOracle::new(feats, 1.0, true, 0.0, 1.0).unwrap();
        let mut plain = Vec::new();
        let mut folded = Vec::new();
        for _ in 0..2 {
            plain.push(ridge.predict(0, 0).unwrap());
            folded.push(vaw.predict(0, 0).unwrap());
            ridge.observe(0, 0, 1.0).unwrap();
            vaw.observe(0, 0, 1.0).unwrap();
        }
        assert_eq!(plain[0], 0.0);
        assert_relative_eq!(plain[1], 0.5, epsilon = 1e-15);
        assert_eq!(folded[0], 0.0);
        assert_relative_eq!(folded[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn linear_prior_prediction_is_clamped_zero() {
        let o = LinearOracle::new(vec![vec![vec![0.6, 0.8]]], 1.0, true, 0.1, 1.0).unwrap();
        assert_eq!(o.predict(0, 0).unwrap(), 0.1);
    }

    #[test]
    fn moment_matrix_stays_positive_definite() {
        let feats = vec![vec![vec![0.6, 0.8], vec![1.0, 0.0]]];
        let mut o = LinearOracle::new(feats, 0.5, false, -1.0, 1.0).unwrap();
        for i in 0..100 {
            o.observe(0, i % 2, if i % 3 == 0 { 1.0 } else { -0.5 }).unwrap();
            let m = o.moment_matrix();
            assert_eq!(m, &m.transpose());
            assert!(m.clone().symmetric_eigenvalues().iter().all(|&e| e > 0.0));
        }
    }

    #[test]
    fn ogd_moves_toward_labels_and_stays_in_ball() {
        let feats = vec![vec![vec![1.0, 0.0]]];
        let mut o = OgdOracle::new(feats, 0.5, 1.0, -1.0, 1.0).unwrap();
        for _ in 0..200 {
            o.observe(0, 0, 0.8).unwrap();
        }
        assert!((o.predict(0, 0).unwrap() - 0.8).abs() < 0.05);
        assert!(o.theta.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn direct_oracle_learns_affine_payoff() {
        let mut o = DirectLagrangeOracle::new(1, 1, 2, 1e-3, -5.0, 5.0).unwrap();
        let truth = |l: &[f64]| 0.5 + 2.0 * l[0] - 1.0 * l[1];
        for i in 0..200 {
            let w = (i % 10) as f64 / 9.0;
            let l = [w, 1.0 - w];
            o.observe(0, 0, &l, truth(&l)).unwrap();
        }
        let l = [0.3, 0.7];
        assert!((o.predict(0, 0, &l).unwrap() - truth(&l)).abs() < 1e-2);
    }
}
