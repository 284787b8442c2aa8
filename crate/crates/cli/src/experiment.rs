//! Building learners from a config and running seeded replications.

use cbwlc::benchmark::{benchmarks, metrics, Benchmarks, MetricsReport};
use cbwlc::env::InstanceSpec;
use cbwlc::orchestrator::{run, AnyPrimal, RunConfig, RunLog, RunSetup};
use cbwlc::primal_squarecb::{
    finite_class_bound, lagrange_oracle_error, squarecb_gamma, Estimator, IgwConfig, SquareCbPrimal,
};
use cbwlc::regression::{
    squared_error_trace, AnyOracle, DirectLagrangeOracle, FiniteClassOracle, LinearOracle, OgdOracle,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, DualKind, ExperimentConfig, Issue, PrimalKind, RegressionConfig, SquareCbConfig};

/// A validated config together with its normalised instance.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub spec: InstanceSpec,
    pub benchmarks: Benchmarks,
}

pub fn prepare(config: ExperimentConfig) -> Result<Prepared, ConfigError> {
    let issues = config.validate();
    if !issues.is_empty() {
        return Err(ConfigError::Invalid(issues));
    }
    let spec = config
        .instance()
        .expect("validated configs carry an inline instance")
        .normalize()
        .map_err(|e| {
            ConfigError::Invalid(vec![Issue {
                path: "instance".into(),
                message: e.to_string(),
            }])
        })?;
    let benchmarks = benchmarks(&spec).map_err(|e| {
        ConfigError::Invalid(vec![Issue {
            path: "instance".into(),
            message: format!("benchmark LP: {e}"),
        }])
    })?;
    Ok(Prepared {
        config,
        spec,
        benchmarks,
    })
}

/// Outcome of the error-aggregation check `err(Lag) ≤ 2 η'² Σ_i err_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationCheck {
    pub lagrange_error: f64,
    pub oracle_errors: Vec<f64>,
    pub bound: f64,
    pub holds: bool,
}

/// One per-round trace line.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub round: usize,
    pub context: usize,
    pub arm: usize,
    /// True outcome `(r, c_1..c_d)` of the played arm.
    pub outcome: Vec<f64>,
    pub lambda: Vec<f64>,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub metrics: MetricsReport,
    pub aggregation: Option<AggregationCheck>,
    pub trace: Option<Vec<TraceRow>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub replication: usize,
    pub seed: u64,
    pub outcome: Result<ReplicationOutcome, String>,
}

#[derive(Debug, Clone)]
pub struct ResultsBundle {
    pub config: ExperimentConfig,
    pub benchmarks: Benchmarks,
    pub num_resources: usize,
    pub replications: Vec<Replication>,
}

impl ResultsBundle {
    pub fn failures(&self) -> impl Iterator<Item = &Replication> {
        self.replications.iter().filter(|r| r.outcome.is_err())
    }
}

impl Prepared {
    pub fn seed(&self, replication: usize) -> u64 {
        self.config.base_seed.wrapping_add(replication as u64)
    }

    pub fn run_config(&self, seed: u64) -> RunConfig {
        let run = &self.config.run;
        RunConfig {
            mode: run.run_mode(),
            eta: run.eta.to_mode(run.mode).expect("validated eta section"),
            delta: run.delta,
            seed,
        }
    }

    /// Switch hint for EXP3.S and Fixed-Share.
    fn switch_hint(&self) -> Option<usize> {
        self.config
            .algorithm
            .num_switches
            .or(Some(self.spec.num_switches()))
            .filter(|&s| s > 0)
    }

    fn share_fallback(&self) -> f64 {
        1.0 / self.spec.horizon as f64
    }

    pub fn setup(&self, seed: u64) -> cbwlc::Result<RunSetup> {
        RunSetup::new(&self.spec, &self.run_config(seed))
    }

    pub fn build_primal(&self, setup: &RunSetup) -> cbwlc::Result<AnyPrimal> {
        let spec = &self.spec;
        let (k, t, delta) = (spec.num_arms, spec.horizon, self.config.run.delta);
        Ok(match self.config.algorithm.primal {
            PrimalKind::Exp3p => AnyPrimal::Bandit(setup.bandit_primal(k, t, delta, None)),
            PrimalKind::Exp3s => AnyPrimal::Bandit(match self.switch_hint() {
                Some(s) => setup.bandit_primal(k, t, delta, Some(s)),
                None => setup
                    .bandit_primal(k, t, delta, None)
                    .with_share_alpha(self.share_fallback()),
            }),
            PrimalKind::Squarecb => {
                let sq = self
                    .config
                    .algorithm
                    .squarecb
                    .as_ref()
                    .expect("validated squarecb section");
                AnyPrimal::SquareCb(self.build_squarecb(sq, setup)?)
            }
        })
    }

    pub fn build_dual(&self, setup: &RunSetup) -> cbwlc::duals::DualState {
        let t = self.spec.horizon;
        match self.config.algorithm.dual {
            DualKind::Hedge => setup.dual(t, None),
            DualKind::FixedShare => match self.switch_hint() {
                Some(s) => setup.dual(t, Some(s)),
                None => setup.dual(t, None).with_share_alpha(self.share_fallback()),
            },
        }
    }

    /// Default regression error bound `U` for the configured class.
    pub fn regression_bound(&self, sq: &SquareCbConfig) -> f64 {
        if let Some(u) = sq.regression_bound {
            return u;
        }
        let spec = &self.spec;
        let d = spec.num_resources();
        let t = spec.horizon as f64;
        let delta = self.config.run.delta;
        let confidence = (2.0 * (d as f64 + 1.0) / delta).ln();
        match &sq.regression {
            RegressionConfig::FiniteClass {
                reward, consumption, ..
            } => {
                let largest = consumption
                    .iter()
                    .map(Vec::len)
                    .chain([reward.len()])
                    .max()
                    .unwrap_or(1);
                finite_class_bound(largest, d, delta)
            }
            RegressionConfig::Linear { features, .. } | RegressionConfig::Ogd { features, .. } => {
                let dim = features[0][0].len() as f64;
                dim * t.ln() + confidence
            }
            RegressionConfig::Direct { .. } => 2.0 * (spec.num_contexts * spec.num_arms) as f64 * t.ln() + confidence,
        }
    }

    fn build_squarecb(&self, sq: &SquareCbConfig, setup: &RunSetup) -> cbwlc::Result<SquareCbPrimal> {
        let spec = &self.spec;
        let d = spec.num_resources();
        let gamma = sq.gamma.unwrap_or_else(|| {
            squarecb_gamma(
                setup.reported_budget,
                spec.horizon,
                spec.num_arms,
                d,
                self.regression_bound(sq),
            )
        });
        let igw = IgwConfig::new(gamma, sq.normalization)?;
        let time = spec.constraints.time_resource();
        let range = |i: usize| (-1.0 - setup.shift[i], 1.0 - setup.shift[i]);
        // The time coordinate is known exactly: a singleton class at its rate.
        let time_oracle = |i: usize| {
            let rate = spec.budget() / spec.horizon as f64 - setup.shift[i];
            let (lo, hi) = range(i);
            FiniteClassOracle::new(vec![vec![vec![rate; spec.num_arms]; spec.num_contexts]], lo, hi)
                .map(AnyOracle::Finite)
        };
        let estimator = match &sq.regression {
            RegressionConfig::FiniteClass {
                reward,
                consumption,
                share_alpha,
            } => {
                let alpha = share_alpha.unwrap_or_else(|| {
                    self.switch_hint()
                        .map_or(0.0, |s| s as f64 / (spec.horizon as f64 - 1.0))
                });
                let raw = self.config.instance().expect("inline instance");
                let mut oracles = vec![AnyOracle::Finite(
                    FiniteClassOracle::new(reward.clone(), 0.0, 1.0)?.with_share_alpha(alpha),
                )];
                let mut declared = consumption.iter();
                for i in 0..d {
                    if Some(i) == time {
                        oracles.push(time_oracle(i)?);
                        continue;
                    }
                    let class = declared.next().expect("validated class count");
                    let scale = spec.budget() / raw.constraints.resources[i].budget;
                    let shifted: Vec<_> = class
                        .iter()
                        .map(|t| {
                            t.iter()
                                .map(|row| row.iter().map(|v| v * scale - setup.shift[i]).collect())
                                .collect()
                        })
                        .collect();
                    let (lo, hi) = range(i);
                    oracles.push(AnyOracle::Finite(
                        FiniteClassOracle::new(shifted, lo, hi)?.with_share_alpha(alpha),
                    ));
                }
                Estimator::PerCoordinate(oracles)
            }
            RegressionConfig::Linear { features, ridge, vaw } => {
                let mut oracles = vec![AnyOracle::Linear(LinearOracle::new(
                    features.clone(),
                    *ridge,
                    *vaw,
                    0.0,
                    1.0,
                )?)];
                for i in 0..d {
                    oracles.push(if Some(i) == time {
                        time_oracle(i)?
                    } else {
                        let (lo, hi) = range(i);
                        AnyOracle::Linear(LinearOracle::new(features.clone(), *ridge, *vaw, lo, hi)?)
                    });
                }
                Estimator::PerCoordinate(oracles)
            }
            RegressionConfig::Ogd {
                features,
                step_size,
                radius,
            } => {
                let mut oracles = vec![AnyOracle::Ogd(OgdOracle::new(
                    features.clone(),
                    *step_size,
                    *radius,
                    0.0,
                    1.0,
                )?)];
                for i in 0..d {
                    oracles.push(if Some(i) == time {
                        time_oracle(i)?
                    } else {
                        let (lo, hi) = range(i);
                        AnyOracle::Ogd(OgdOracle::new(features.clone(), *step_size, *radius, lo, hi)?)
                    });
                }
                Estimator::PerCoordinate(oracles)
            }
            RegressionConfig::Direct { ridge } => Estimator::Direct(DirectLagrangeOracle::new(
                spec.num_contexts,
                spec.num_arms,
                d,
                *ridge,
                setup.params.payoff_lo,
                setup.params.payoff_hi,
            )?),
        };
        SquareCbPrimal::new(estimator, igw, setup.params, setup.signs.clone(), spec.num_arms)
    }

    /// Run one replication and return its log.
    pub fn run_log(&self, seed: u64) -> cbwlc::Result<RunLog> {
        let setup = self.setup(seed)?;
        let primal = self.build_primal(&setup)?;
        let dual = self.build_dual(&setup);
        run(&self.spec, primal, dual, setup, seed)
    }

    pub fn run_replication(&self, replication: usize, keep_trace: bool) -> Replication {
        let seed = self.seed(replication);
        let outcome = self
            .run_log(seed)
            .and_then(|log| self.evaluate(&log, keep_trace))
            .map_err(|e| e.to_string());
        if let Err(e) = &outcome {
            log::error!("replication {replication} (seed {seed}) failed: {e}");
        }
        Replication {
            replication,
            seed,
            outcome,
        }
    }

    fn evaluate(&self, log: &RunLog, keep_trace: bool) -> cbwlc::Result<ReplicationOutcome> {
        let metrics = metrics(log, &self.spec, &self.benchmarks)?;
        let aggregation = match self.config.algorithm.primal {
            PrimalKind::Squarecb => aggregation_check(log, &self.spec),
            _ => None,
        };
        if let Some(check) = &aggregation {
            if !check.holds {
                log::error!("error aggregation violated: {} > {}", check.lagrange_error, check.bound);
            }
        }
        let trace = keep_trace.then(|| {
            log.rounds
                .iter()
                .map(|r| TraceRow {
                    round: r.round,
                    context: r.context,
                    arm: r.arm,
                    outcome: r.outcome().to_vec(),
                    lambda: r.lambda.clone(),
                    payoff: r.payoff,
                })
                .collect()
        });
        Ok(ReplicationOutcome {
            metrics,
            aggregation,
            trace,
        })
    }

    /// All replications, in replication order, on a pool of `parallel` threads.
    pub fn run_all(&self, parallel: usize, keep_trace: bool) -> Result<ResultsBundle, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(parallel.max(1)).build()?;
        let replications = pool.install(|| {
            (0..self.config.replications)
                .into_par_iter()
                .map(|r| self.run_replication(r, keep_trace))
                .collect()
        });
        Ok(ResultsBundle {
            config: self.config.clone(),
            benchmarks: self.benchmarks.clone(),
            num_resources: self.spec.num_resources(),
            replications,
        })
    }
}

/// Compare the composed Lagrange estimate's squared error with
/// `2 η'² Σ_i err_i`; `None` for runs without per-coordinate predictions.
pub fn aggregation_check(log: &RunLog, spec: &InstanceSpec) -> Option<AggregationCheck> {
    if log.active_rounds().iter().all(|r| r.predictions.is_none()) {
        return None;
    }
    let oracle_errors = squared_error_trace(log, spec).totals();
    let lagrange_error = lagrange_oracle_error(log, spec);
    let eta_prime = log.params.eta_prime;
    let bound = 2.0 * eta_prime * eta_prime * oracle_errors.iter().sum::<f64>();
    // Only summation rounding separates the two sides.
    let holds = lagrange_error <= bound * (1.0 + 1e-12) + 1e-12;
    Some(AggregationCheck {
        lagrange_error,
        oracle_errors,
        bound,
        holds,
    })
}
