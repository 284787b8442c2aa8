//! The repeated Lagrangian game.
//!
//! Each round the dual emits `λ_t`, the environment draws `(x_t, M_t)`, the
//! primal picks `a_t` after seeing `(x_t, λ_t)`, and both learners are fed the
//! Lagrange payoffs of the realised outcome. Three modes are supported:
//!
//! - `Standard`: always runs all `T` rounds.
//! - `HardStop`: packing-only problems with a null arm; once a budget could be
//!   exceeded within one more round, the null arm is played for the rest of
//!   the horizon and learning stops.
//! - `ZeroViolation`: the learners see a slightly harder problem (budget
//!   `B(1−ε)`, covering consumptions lowered by `2εB/T`) while the log keeps
//!   the true outcomes.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::duals::{DualAlgorithm, DualState};
use crate::env::{sample_round_with_stats, ClampStats, InstanceSpec, OutcomeMatrix, Sign};
use crate::lagrangian::{choose_eta, payoff_unchecked, per_resource_payoffs, EtaMode, LagrangeParams};
use crate::primal_bandit::AdvBanditState;
use crate::primal_squarecb::SquareCbPrimal;
use crate::{Error, Result};

/// What the primal commits to in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDecision {
    pub arm: usize,
    pub distribution: Option<Vec<f64>>,
    /// Per-coordinate predictions at the chosen arm (reward first).
    pub predictions: Option<Vec<f64>>,
    /// Estimated Lagrange payoff of the chosen arm.
    pub lagrange_estimate: Option<f64>,
}

/// An arm-choosing learner fed Lagrange payoffs as rewards.
pub trait PrimalAlgorithm {
    fn decide(&mut self, context: usize, lambda: &[f64], rng: &mut dyn RngCore) -> Result<PrimalDecision>;
    /// `outcome` is the outcome vector of the played arm as reported to the
    /// learners; `payoff` is its Lagrange payoff.
    fn observe(&mut self, context: usize, arm: usize, outcome: &[f64], payoff: f64) -> Result<()>;
}

/// Either kind of primal, for callers that pick one at runtime.
#[derive(Debug, Clone)]
pub enum AnyPrimal {
    Bandit(AdvBanditState),
    SquareCb(SquareCbPrimal),
}

impl PrimalAlgorithm for AnyPrimal {
    fn decide(&mut self, context: usize, lambda: &[f64], rng: &mut dyn RngCore) -> Result<PrimalDecision> {
        match self {
            AnyPrimal::Bandit(p) => p.decide(context, lambda, rng),
            AnyPrimal::SquareCb(p) => p.decide(context, lambda, rng),
        }
    }

    fn observe(&mut self, context: usize, arm: usize, outcome: &[f64], payoff: f64) -> Result<()> {
        match self {
            AnyPrimal::Bandit(p) => p.observe(context, arm, outcome, payoff),
            AnyPrimal::SquareCb(p) => p.observe(context, arm, outcome, payoff),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    Standard,
    HardStop,
    ZeroViolation {
        epsilon: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: RunMode,
    pub eta: EtaMode,
    pub delta: f64,
    pub seed: u64,
}

/// `ε = 16 T R / (ζ B²)`.
pub fn zero_violation_epsilon(horizon: usize, regret_estimate: f64, zeta: f64, budget: f64) -> f64 {
    16.0 * horizon as f64 * regret_estimate / (zeta * budget * budget)
}

/// Everything the learners must agree on before a run starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSetup {
    pub mode: RunMode,
    pub params: LagrangeParams,
    pub signs: Vec<f64>,
    /// Amount subtracted from each true consumption before reporting.
    pub shift: Vec<f64>,
    /// True common budget `B`.
    pub budget: f64,
    /// Budget the learners plan against (`B(1−ε)` in zero-violation mode).
    pub reported_budget: f64,
    pub null_arm: Option<usize>,
}

impl RunSetup {
    /// Validate mode requirements on a normalised instance and derive the
    /// Lagrange parameters (with a range tightened to the instance).
    pub fn new(spec: &InstanceSpec, config: &RunConfig) -> Result<Self> {
        if !spec.is_normalized() {
            return Err(Error::InvalidInstance("instance must be normalised first".into()));
        }
        if !(config.delta > 0.0 && config.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {}",
                config.delta
            )));
        }
        let b = spec.budget();
        let t = spec.horizon as f64;
        let d = spec.num_resources();
        let signs = spec.constraints.signs();
        let mut shift = vec![0.0; d];
        let mut reported_budget = b;
        let mut cmax = 1.0;
        match config.mode {
            RunMode::Standard => {}
            RunMode::HardStop => check_hard_stop(spec, config)?,
            RunMode::ZeroViolation { epsilon } => {
                let EtaMode::ZeroViolation { zeta } = config.eta else {
                    return Err(Error::InvalidParameter(
                        "zero-violation mode needs the zero_violation eta rule".into(),
                    ));
                };
                if !(epsilon > 0.0 && epsilon <= 0.5) {
                    return Err(Error::InvalidParameter(format!(
                        "epsilon must lie in (0, 1/2], got {epsilon}"
                    )));
                }
                if epsilon > zeta / 2.0 {
                    return Err(Error::InvalidParameter(format!(
                        "epsilon {epsilon} exceeds half the Slater margin {zeta}"
                    )));
                }
                reported_budget = b * (1.0 - epsilon);
                for (i, res) in spec.constraints.resources.iter().enumerate() {
                    shift[i] = if res.is_time {
                        // time keeps its defining rate B'/T on the rescaled budget
                        epsilon * b / t
                    } else if res.sign == Sign::Covering {
                        2.0 * epsilon * b / t
                    } else {
                        0.0
                    };
                }
                cmax = 1.0 + 2.0 * epsilon * b / t;
            }
        }
        let base = choose_eta(config.eta, reported_budget, spec.horizon)?;
        let params = LagrangeParams::with_consumption_bound(base.eta, base.ratio, cmax)?.tightened_for(spec, &shift);
        Ok(Self {
            mode: config.mode,
            params,
            signs,
            shift,
            budget: b,
            reported_budget,
            null_arm: spec.null_arm,
        })
    }

    /// The instance as the learners see it: consumption means shifted.
    pub fn reported_instance(&self, spec: &InstanceSpec) -> InstanceSpec {
        let mut out = spec.clone();
        for seg in out.segments.iter_mut() {
            seg.model = seg.model.shifted(&self.shift);
        }
        for r in out.constraints.resources.iter_mut() {
            r.budget = self.reported_budget;
        }
        out
    }

    /// Fresh Hedge (no hint) or Fixed-Share dual sized for this setup.
    pub fn dual(&self, horizon: usize, num_switches_hint: Option<usize>) -> DualState {
        DualState::for_range(
            self.signs.len(),
            horizon,
            self.params.payoff_lo,
            self.params.payoff_hi,
            num_switches_hint,
        )
    }

    /// Fresh EXP3.P (no hint) or EXP3.S bandit primal sized for this setup.
    pub fn bandit_primal(
        &self,
        num_arms: usize,
        horizon: usize,
        delta: f64,
        num_switches_hint: Option<usize>,
    ) -> AdvBanditState {
        AdvBanditState::for_range(
            num_arms,
            horizon,
            delta,
            self.params.payoff_lo,
            self.params.payoff_hi,
            num_switches_hint,
        )
    }
}

fn check_hard_stop(spec: &InstanceSpec, config: &RunConfig) -> Result<()> {
    if spec.constraints.resources.iter().any(|r| r.sign != Sign::Packing) {
        return Err(Error::HardStopRequirement("packing constraints only".into()));
    }
    let null = spec
        .null_arm
        .ok_or_else(|| Error::HardStopRequirement("a declared null arm".into()))?;
    for seg in &spec.segments {
        for x in 0..spec.num_contexts {
            let m = &seg.model;
            let zero_cons = spec
                .constraints
                .resources
                .iter()
                .enumerate()
                .all(|(i, r)| r.is_time || m.consumption[x][null][i] == 0.0);
            if m.reward[x][null] != 0.0 || !zero_cons {
                return Err(Error::HardStopRequirement(
                    "a null arm with zero reward and consumption".into(),
                ));
            }
        }
    }
    if !matches!(config.eta, EtaMode::HardStop) {
        return Err(Error::HardStopRequirement("eta = 1".into()));
    }
    Ok(())
}

/// One logged round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub context: usize,
    pub lambda: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<f64>>,
    pub arm: usize,
    /// True counterfactual outcomes of every arm.
    pub outcomes: OutcomeMatrix,
    /// `Lag_t(a_t, e_i)` on the reported outcome.
    pub per_resource_payoffs: Vec<f64>,
    /// `Lag_t(a_t, λ_t)` on the reported outcome.
    pub payoff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictions: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lagrange_estimate: Option<f64>,
}

impl RoundRecord {
    /// True outcome vector of the played arm.
    pub fn outcome(&self) -> &[f64] {
        self.outcomes.row(self.arm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub rounds: Vec<RoundRecord>,
    /// First round played by the null arm after a hard stop.
    pub stop_round: Option<usize>,
    pub params: LagrangeParams,
    pub signs: Vec<f64>,
    pub reported_shift: Vec<f64>,
    pub budget: f64,
    pub horizon: usize,
    pub mode: RunMode,
    /// Index of the time resource, if any.
    #[serde(default)]
    pub time_resource: Option<usize>,
}

impl RunLog {
    /// Rounds in which the learners were active (all, unless hard-stopped).
    pub fn active_rounds(&self) -> &[RoundRecord] {
        let end = self
            .stop_round
            .map_or(self.rounds.len(), |s| (s - 1).min(self.rounds.len()));
        &self.rounds[..end]
    }

    /// Outcome vector of `arm` at `rec` as the learners would see it.
    pub fn reported_row(&self, rec: &RoundRecord, arm: usize) -> Vec<f64> {
        let mut row = rec.outcomes.row(arm).to_vec();
        for (c, s) in row[1..].iter_mut().zip(&self.reported_shift) {
            *c -= s;
        }
        row
    }

    /// `Lag_t(a, λ_t)` for every arm.
    pub fn counterfactual_payoffs(&self, rec: &RoundRecord) -> Vec<f64> {
        (0..rec.outcomes.num_arms())
            .map(|a| payoff_unchecked(&self.reported_row(rec, a), &rec.lambda, &self.params, &self.signs))
            .collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.rounds.iter().map(|r| r.outcome()[0]).sum()
    }

    /// True cumulative consumption per resource.
    pub fn total_consumption(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.signs.len()];
        for r in &self.rounds {
            for (t, c) in total.iter_mut().zip(&r.outcome()[1..]) {
                *t += c;
            }
        }
        total
    }
}

/// Random streams of a run: one for the environment, one for the learners.
pub fn seeded_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut env = ChaCha8Rng::seed_from_u64(seed);
    env.set_stream(0);
    let mut alg = ChaCha8Rng::seed_from_u64(seed);
    alg.set_stream(1);
    (env, alg)
}

/// State of a run between rounds, detachable so a run can be resumed
/// elsewhere.
#[derive(Debug, Clone)]
pub struct LoopParts<P, D> {
    pub primal: P,
    pub dual: D,
    pub env_rng: ChaCha8Rng,
    pub alg_rng: ChaCha8Rng,
    pub next_round: usize,
    pub consumed: Vec<f64>,
    pub stop_round: Option<usize>,
}

/// Round-by-round driver of the game.
pub struct GameLoop<'a, P, D> {
    spec: &'a InstanceSpec,
    setup: RunSetup,
    parts: LoopParts<P, D>,
    rounds: Vec<RoundRecord>,
    clamp: ClampStats,
}

impl<'a, P: PrimalAlgorithm, D: DualAlgorithm> GameLoop<'a, P, D> {
    pub fn new(spec: &'a InstanceSpec, setup: RunSetup, primal: P, dual: D, seed: u64) -> Self {
        let (env_rng, alg_rng) = seeded_streams(seed);
        let d = setup.signs.len();
        Self::from_parts(
            spec,
            setup,
            LoopParts {
                primal,
                dual,
                env_rng,
                alg_rng,
                next_round: 1,
                consumed: vec![0.0; d],
                stop_round: None,
            },
        )
    }

    pub fn from_parts(spec: &'a InstanceSpec, setup: RunSetup, parts: LoopParts<P, D>) -> Self {
        Self {
            spec,
            setup,
            rounds: Vec::with_capacity(spec.horizon + 1 - parts.next_round.min(spec.horizon + 1)),
            parts,
            clamp: ClampStats::default(),
        }
    }

    pub fn parts(&self) -> &LoopParts<P, D> {
        &self.parts
    }

    pub fn into_parts(self) -> (LoopParts<P, D>, Vec<RoundRecord>) {
        (self.parts, self.rounds)
    }

    pub fn is_done(&self) -> bool {
        self.parts.next_round > self.spec.horizon
    }

    /// The dual distribution the next round will use.
    pub fn next_lambda(&self) -> Vec<f64> {
        self.parts.dual.lambda()
    }

    /// Play one round with a freshly sampled environment draw.
    pub fn step(&mut self) -> Result<()> {
        let t = self.parts.next_round;
        // λ_t is fixed before anything about round t is drawn.
        let lambda = self.parts.dual.lambda();
        let (x, m) = sample_round_with_stats(self.spec, t, &mut self.parts.env_rng, &mut self.clamp);
        self.play(lambda, x, m)
    }

    /// Play one round against a caller-supplied draw (the environment stream
    /// is not advanced).
    pub fn step_with_sample(&mut self, context: usize, outcomes: OutcomeMatrix) -> Result<()> {
        let lambda = self.parts.dual.lambda();
        self.play(lambda, context, outcomes)
    }

    fn hard_stop_due(&self) -> bool {
        // Worst-case one more round of consumption 1 on every non-time resource.
        self.spec
            .constraints
            .resources
            .iter()
            .zip(&self.parts.consumed)
            .any(|(r, &c)| !r.is_time && c + 1.0 > self.setup.budget)
    }

    fn play(&mut self, lambda: Vec<f64>, context: usize, outcomes: OutcomeMatrix) -> Result<()> {
        let t = self.parts.next_round;
        if t > self.spec.horizon {
            return Err(Error::InvalidParameter("horizon exhausted".into()));
        }
        if self.setup.mode == RunMode::HardStop && self.parts.stop_round.is_none() && self.hard_stop_due() {
            self.parts.stop_round = Some(t);
        }
        let stopped = self.parts.stop_round.is_some();
        let decision = if stopped {
            PrimalDecision {
                arm: self.setup.null_arm.expect("checked by setup"),
                distribution: None,
                predictions: None,
                lagrange_estimate: None,
            }
        } else {
            self.parts.primal.decide(context, &lambda, &mut self.parts.alg_rng)?
        };
        let arm = decision.arm;
        let mut reported = outcomes.row(arm).to_vec();
        for (c, s) in reported[1..].iter_mut().zip(&self.setup.shift) {
            *c -= s;
        }
        let params = &self.setup.params;
        let payoff = payoff_unchecked(&reported, &lambda, params, &self.setup.signs);
        let per_resource = per_resource_payoffs(&reported, params, &self.setup.signs);
        if !stopped {
            if !params.contains(payoff) {
                return Err(Error::OutOfRange {
                    value: payoff,
                    lo: params.payoff_lo,
                    hi: params.payoff_hi,
                });
            }
            self.parts.primal.observe(context, arm, &reported, payoff)?;
            self.parts.dual.observe_costs(&per_resource)?;
        }
        for (acc, c) in self.parts.consumed.iter_mut().zip(&outcomes.row(arm)[1..]) {
            *acc += c;
        }
        self.rounds.push(RoundRecord {
            round: t,
            context,
            lambda,
            distribution: decision.distribution,
            arm,
            outcomes,
            per_resource_payoffs: per_resource,
            payoff,
            predictions: decision.predictions,
            lagrange_estimate: decision.lagrange_estimate,
        });
        self.parts.next_round += 1;
        Ok(())
    }

    /// Run the remaining rounds.
    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    pub fn finish(self) -> RunLog {
        if self.clamp.rate() > 0.01 {
            log::warn!(
                "{:.2}% of Gaussian noise draws were clamped into range",
                100.0 * self.clamp.rate()
            );
        }
        RunLog {
            rounds: self.rounds,
            stop_round: self.parts.stop_round,
            params: self.setup.params,
            signs: self.setup.signs,
            reported_shift: self.setup.shift,
            budget: self.setup.budget,
            horizon: self.spec.horizon,
            mode: self.setup.mode,
            time_resource: self.spec.constraints.time_resource(),
        }
    }
}

/// Run the full game for `config.mode`.
pub fn run<P: PrimalAlgorithm, D: DualAlgorithm>(
    spec: &InstanceSpec,
    primal: P,
    dual: D,
    setup: RunSetup,
    seed: u64,
) -> Result<RunLog> {
    let mut game = GameLoop::new(spec, setup, primal, dual, seed);
    game.run_to_end()?;
    Ok(game.finish())
}

/// Hard-stopping run; rejects setups built for another mode.
pub fn run_hard_stop<P: PrimalAlgorithm, D: DualAlgorithm>(
    spec: &InstanceSpec,
    primal: P,
    dual: D,
    setup: RunSetup,
    seed: u64,
) -> Result<RunLog> {
    if setup.mode != RunMode::HardStop {
        return Err(Error::InvalidParameter("setup is not in hard-stop mode".into()));
    }
    run(spec, primal, dual, setup, seed)
}

/// Zero-violation run; rejects setups built for another mode.
pub fn run_zero_violation<P: PrimalAlgorithm, D: DualAlgorithm>(
    spec: &InstanceSpec,
    primal: P,
    dual: D,
    setup: RunSetup,
    seed: u64,
) -> Result<RunLog> {
    if !matches!(setup.mode, RunMode::ZeroViolation { .. }) {
        return Err(Error::InvalidParameter("setup is not in zero-violation mode".into()));
    }
    run(spec, primal, dual, setup, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ConstraintSpec, OutcomeModel, Resource, Segment};

    fn bwk(budget: f64, horizon: usize) -> InstanceSpec {
        InstanceSpec {
            horizon,
            num_arms: 2,
            num_contexts: 1,
            arrivals: vec![1.0],
            constraints: ConstraintSpec {
                resources: vec![Resource {
                    sign: Sign::Packing,
                    budget,
                    is_time: false,
                }],
            },
            segments: vec![Segment {
                start: 1,
                arrivals: None,
                model: OutcomeModel::deterministic(vec![vec![1.0, 0.0]], vec![vec![vec![1.0], vec![0.0]]]),
            }],
            null_arm: Some(1),
        }
        .normalize()
        .unwrap()
    }

    /// Always plays one fixed arm.
    #[derive(Clone)]
    struct Fixed(usize);

    impl PrimalAlgorithm for Fixed {
        fn decide(&mut self, _: usize, _: &[f64], _: &mut dyn RngCore) -> Result<PrimalDecision> {
            Ok(PrimalDecision {
                arm: self.0,
                distribution: None,
                predictions: None,
                lagrange_estimate: None,
            })
        }
        fn observe(&mut self, _: usize, _: usize, _: &[f64], _: f64) -> Result<()> {
            Ok(())
        }
    }

    fn config(mode: RunMode, eta: EtaMode) -> RunConfig {
        RunConfig {
            mode,
            eta,
            delta: 0.05,
            seed: 7,
        }
    }

    #[test]
    fn hard_stop_counts_rounds() {
        let spec = bwk(10.0, 50);
        let setup = RunSetup::new(&spec, &config(RunMode::HardStop, EtaMode::HardStop)).unwrap();
        let dual = setup.dual(50, None);
        let log = run_hard_stop(&spec, Fixed(0), dual, setup, 1).unwrap();
        assert_eq!(log.stop_round, Some(11));
        assert!(log.rounds[10..].iter().all(|r| r.arm == 1));
        assert_eq!(log.total_consumption()[0], 10.0);
        assert_eq!(log.rounds.len(), 50);
    }

    #[test]
    fn null_only_play_never_stops() {
        let spec = bwk(10.0, 50);
        let setup = RunSetup::new(&spec, &config(RunMode::HardStop, EtaMode::HardStop)).unwrap();
        let dual = setup.dual(50, None);
        let log = run(&spec, Fixed(1), dual, setup, 1).unwrap();
        assert_eq!(log.stop_round, None);
        assert_eq!(log.total_reward(), 0.0);
    }

    #[test]
    fn hard_stop_requirements() {
        let mut spec = bwk(10.0, 50);
        spec.null_arm = None;
        assert!(matches!(
            RunSetup::new(&spec, &config(RunMode::HardStop, EtaMode::HardStop)),
            Err(Error::HardStopRequirement(_))
        ));
        let spec = bwk(10.0, 50);
        assert!(matches!(
            RunSetup::new(&spec, &config(RunMode::HardStop, EtaMode::Fixed { eta: 2.0 })),
            Err(Error::HardStopRequirement(_))
        ));
    }

    #[test]
    fn zero_violation_shifts_covering_only() {
        let spec = InstanceSpec {
            horizon: 1000,
            num_arms: 2,
            num_contexts: 1,
            arrivals: vec![1.0],
            constraints: ConstraintSpec {
                resources: vec![
                    Resource {
                        sign: Sign::Covering,
                        budget: 100.0,
                        is_time: false,
                    },
                    Resource {
                        sign: Sign::Packing,
                        budget: 100.0,
                        is_time: false,
                    },
                ],
            },
            segments: vec![Segment {
                start: 1,
                arrivals: None,
                model: OutcomeModel::deterministic(vec![vec![0.5, 0.0]], vec![vec![vec![0.3, 0.2], vec![0.0, 0.0]]]),
            }],
            null_arm: None,
        }
        .normalize()
        .unwrap();
        let cfg = config(
            RunMode::ZeroViolation { epsilon: 0.1 },
            EtaMode::ZeroViolation { zeta: 0.5 },
        );
        let setup = RunSetup::new(&spec, &cfg).unwrap();
        assert!((setup.reported_budget - 90.0).abs() < 1e-12);
        assert!((setup.shift[0] - 0.02).abs() < 1e-15);
        assert_eq!(setup.shift[1], 0.0);
        assert!((setup.params.ratio - 1000.0 / 90.0).abs() < 1e-12);
        let bad = config(
            RunMode::ZeroViolation { epsilon: 0.3 },
            EtaMode::ZeroViolation { zeta: 0.5 },
        );
        assert!(RunSetup::new(&spec, &bad).is_err());
    }

    #[test]
    fn one_round_log_uses_initial_lambda() {
        let spec = InstanceSpec {
            horizon: 1,
            ..bwk(1.0, 1)
        };
        let setup = RunSetup::new(&spec, &config(RunMode::Standard, EtaMode::Fixed { eta: 1.0 })).unwrap();
        let dual = setup.dual(1, None);
        let init = dual.lambda();
        let log = run(&spec, Fixed(0), dual, setup, 3).unwrap();
        assert_eq!(log.rounds.len(), 1);
        assert_eq!(log.rounds[0].lambda, init);
    }

    #[test]
    fn epsilon_helper() {
        assert!(
            (zero_violation_epsilon(1000, 10.0, 0.5, 400.0) - 16.0 * 1000.0 * 10.0 / (0.5 * 160_000.0)).abs() < 1e-15
        );
    }
}
