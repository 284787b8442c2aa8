//! Linear-programming benchmarks and run metrics.
//!
//! The benchmark LP ranges over distributions over policies, but its
//! objective and constraints only depend on per-context arm marginals, so it
//! is solved over `D(a|x)` directly. Resource rows are written in the
//! normalised form `σ_i (T/B) c_i(D) ≤ σ_i`, which makes the row multipliers
//! the Lagrange multipliers `λ*` of `r(D) + Σ σ_i λ_i (1 − (T/B) c_i(D))`.

pub mod saddle;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::env::{InstanceSpec, OutcomeModel};
use crate::orchestrator::RunLog;
use crate::Result;
use simplex::{LinearProgram, RowKind};

pub use saddle::{check_saddle_point, LagrangianGame, SaddleReport};

/// Tolerance for a constraint counting as active.
const ACTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    /// `D(a|x)`.
    pub dist: Vec<Vec<f64>>,
    /// Per-round value `OPT_LP`.
    pub value: f64,
    /// Resources whose constraint is tight at `dist`.
    pub active: Vec<usize>,
    /// Optimal multipliers `λ*_i ≥ 0` (zero for the time resource).
    pub duals: Vec<f64>,
}

/// Inputs of one stationary LP.
#[derive(Debug, Clone, Copy)]
pub struct LpInput<'a> {
    pub model: &'a OutcomeModel,
    pub arrivals: &'a [f64],
    pub signs: &'a [f64],
    /// Indices of time resources (dropped from the margin LP).
    pub time: Option<usize>,
    pub horizon: usize,
    pub budget: f64,
}

impl<'a> LpInput<'a> {
    /// The LP of segment `segment` of `spec`.
    pub fn from_spec(spec: &'a InstanceSpec, segment: usize, signs: &'a [f64]) -> Self {
        Self {
            model: &spec.segments[segment].model,
            arrivals: spec.segment_arrivals(segment),
            signs,
            time: spec.constraints.time_resource(),
            horizon: spec.horizon,
            budget: spec.budget(),
        }
    }

    fn ratio(&self) -> f64 {
        self.horizon as f64 / self.budget
    }

    fn num_contexts(&self) -> usize {
        self.arrivals.len()
    }

    fn num_arms(&self) -> usize {
        self.model.reward[0].len()
    }

    /// `c_i(D)` for a per-context distribution.
    pub fn consumption(&self, dist: &[Vec<f64>], resource: usize) -> f64 {
        let mut total = 0.0;
        for (x, (px, dx)) in self.arrivals.iter().zip(dist).enumerate() {
            for (a, d) in dx.iter().enumerate() {
                total += px * d * self.model.consumption[x][a][resource];
            }
        }
        total
    }

    pub fn reward(&self, dist: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for (x, (px, dx)) in self.arrivals.iter().zip(dist).enumerate() {
            for (a, d) in dx.iter().enumerate() {
                total += px * d * self.model.reward[x][a];
            }
        }
        total
    }

    /// `σ_i ((T/B) c_i(D) − 1)` per resource.
    pub fn normalized_slacks(&self, dist: &[Vec<f64>]) -> Vec<f64> {
        (0..self.signs.len())
            .map(|i| self.signs[i] * (self.ratio() * self.consumption(dist, i) - 1.0))
            .collect()
    }

    /// The time row is implied by the simplex rows when time consumption is
    /// exactly `B/T` everywhere.
    fn time_row_redundant(&self) -> bool {
        let Some(t) = self.time else { return false };
        let rate = self.budget / self.horizon as f64;
        self.model
            .consumption
            .iter()
            .flatten()
            .all(|c| (c[t] - rate).abs() <= 1e-12)
    }

    fn resource_row(&self, i: usize, extra: usize) -> Vec<f64> {
        let k = self.num_arms();
        let mut row = vec![0.0; self.num_contexts() * k + extra];
        for (x, px) in self.arrivals.iter().enumerate() {
            for a in 0..k {
                row[x * k + a] = self.signs[i] * self.ratio() * px * self.model.consumption[x][a][i];
            }
        }
        row
    }

    fn simplex_rows(&self, lp: &mut LinearProgram, extra: usize) {
        let k = self.num_arms();
        let n = self.num_contexts() * k;
        for x in 0..self.num_contexts() {
            let mut row = vec![0.0; n + extra];
            for a in 0..k {
                row[x * k + a] = 1.0;
            }
            lp.push(row, RowKind::Eq, 1.0);
        }
    }

    fn unpack(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let k = self.num_arms();
        (0..self.num_contexts())
            .map(|c| {
                let row = &x[c * k..(c + 1) * k];
                let s: f64 = row.iter().sum();
                row.iter().map(|v| v / s).collect()
            })
            .collect()
    }
}

/// Maximise `r(D)` subject to every resource constraint.
pub fn solve_opt_lp(input: &LpInput) -> Result<LpSolution> {
    let k = input.num_arms();
    let n = input.num_contexts() * k;
    let mut objective = vec![0.0; n];
    for (x, px) in input.arrivals.iter().enumerate() {
        for a in 0..k {
            objective[x * k + a] = px * input.model.reward[x][a];
        }
    }
    let mut lp = LinearProgram::new(objective);
    input.simplex_rows(&mut lp, 0);
    let skip_time = input.time_row_redundant();
    let mut row_of = vec![None; input.signs.len()];
    for (i, slot) in row_of.iter_mut().enumerate() {
        if skip_time && Some(i) == input.time {
            continue;
        }
        *slot = Some(lp.rows.len());
        lp.push(input.resource_row(i, 0), RowKind::Le, input.signs[i]);
    }
    let out = simplex::solve(&lp)?;
    let dist = input.unpack(&out.x);
    let slacks = input.normalized_slacks(&dist);
    let active = (0..input.signs.len())
        .filter(|&i| slacks[i].abs() <= ACTIVE_TOL || (skip_time && Some(i) == input.time))
        .collect();
    let duals = row_of
        .iter()
        .map(|r| r.map_or(0.0, |r| out.duals[r].max(0.0)))
        .collect();
    Ok(LpSolution {
        value: input.reward(&dist),
        dist,
        active,
        duals,
    })
}

/// Largest `ζ` with `σ_i ((T/B) c_i(D) − 1) ≤ −ζ` for every non-time
/// resource at some `D`; infinite when there are no non-time resources.
pub fn slater_margin(input: &LpInput) -> Result<f64> {
    let k = input.num_arms();
    let n = input.num_contexts() * k;
    let mut objective = vec![0.0; n + 2];
    objective[n] = 1.0;
    objective[n + 1] = -1.0;
    let mut lp = LinearProgram::new(objective);
    input.simplex_rows(&mut lp, 2);
    let mut any = false;
    for i in 0..input.signs.len() {
        if Some(i) == input.time {
            continue;
        }
        any = true;
        let mut row = input.resource_row(i, 2);
        row[n] = 1.0;
        row[n + 1] = -1.0;
        lp.push(row, RowKind::Le, input.signs[i]);
    }
    if !any {
        return Ok(f64::INFINITY);
    }
    Ok(simplex::solve(&lp)?.objective)
}

/// `Σ_t OPT_LP,t`: segment length times the segment's LP value.
pub fn pacing_benchmark(spec: &InstanceSpec) -> Result<f64> {
    let signs = spec.constraints.signs();
    let mut total = 0.0;
    for (j, (start, end)) in spec.segment_bounds().into_iter().enumerate() {
        let sol = solve_opt_lp(&LpInput::from_spec(spec, j, &signs))?;
        total += (end + 1 - start) as f64 * sol.value;
    }
    Ok(total)
}

/// `c0 (T/B) η √(T ln(dT/δ))`.
pub fn conc_reg(horizon: usize, budget: f64, eta: f64, d: usize, _k: usize, delta: f64, c0: f64) -> f64 {
    let t = horizon as f64;
    c0 * (t / budget) * eta * (t * (d as f64 * t / delta).ln()).sqrt()
}

/// Benchmark values of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmarks {
    /// Per-round LP value of the first segment.
    pub opt_lp: f64,
    /// `T · OPT_LP` (stationary) or the pacing benchmark (switching).
    pub opt: f64,
    pub opt_pac: f64,
    /// Slater margin of the first segment.
    pub zeta: f64,
}

pub fn benchmarks(spec: &InstanceSpec) -> Result<Benchmarks> {
    let signs = spec.constraints.signs();
    let input = LpInput::from_spec(spec, 0, &signs);
    let opt_lp = solve_opt_lp(&input)?.value;
    let opt_pac = pacing_benchmark(spec)?;
    let mut zeta = f64::INFINITY;
    for j in 0..spec.segments.len() {
        zeta = zeta.min(slater_margin(&LpInput::from_spec(spec, j, &signs))?);
    }
    let opt = if spec.is_stationary() {
        spec.horizon as f64 * opt_lp
    } else {
        opt_pac
    };
    Ok(Benchmarks {
        opt_lp,
        opt,
        opt_pac,
        zeta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total_reward: f64,
    pub opt: f64,
    pub opt_pac: f64,
    /// `OPT − reward`.
    pub regret: f64,
    /// `σ_i (Σ_t c_{t,i} − B)` with true consumptions.
    pub violations: Vec<f64>,
    pub reg_out: f64,
    pub reg_pace: f64,
    pub primal_reg: f64,
    pub dual_reg: f64,
    pub nu_measured: f64,
    pub stop_round: Option<usize>,
}

impl MetricsReport {
    pub fn max_violation(&self) -> f64 {
        self.violations.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `V_i(T) = σ_i (Σ_t c_{t,i} − B)` over a log's true consumptions.
/// `V_i = σ_i (Σ_t c_{t,i} − B)`. The time resource is consumed at exactly
/// `B/T` per round, so its violation is computed without summation drift.
pub fn violations(log: &RunLog) -> Vec<f64> {
    log.total_consumption()
        .iter()
        .zip(&log.signs)
        .enumerate()
        .map(|(i, (c, s))| {
            if Some(i) == log.time_resource {
                s * log.budget * (log.rounds.len() as f64 / log.horizon as f64 - 1.0)
            } else {
                s * (c - log.budget)
            }
        })
        .collect()
}

pub fn metrics(log: &RunLog, spec: &InstanceSpec, bench: &Benchmarks) -> Result<MetricsReport> {
    let total_reward = log.total_reward();
    let violations = violations(log);
    let vmax = violations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let switches = spec.switch_rounds();
    let saddle = check_saddle_point(log, spec, f64::INFINITY)?;
    Ok(MetricsReport {
        total_reward,
        opt: bench.opt,
        opt_pac: bench.opt_pac,
        regret: bench.opt - total_reward,
        reg_out: (bench.opt - total_reward).max(vmax),
        reg_pace: (bench.opt_pac - total_reward).max(vmax),
        primal_reg: crate::primal_bandit::realized_primal_regret_contextual(log, &switches),
        dual_reg: crate::duals::realized_dual_regret(log, &switches),
        nu_measured: saddle.nu,
        stop_round: log.stop_round,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ConstraintSpec, Resource, Segment, Sign};
    use crate::Error;
    use approx::assert_relative_eq;

    fn spec(
        rewards: Vec<Vec<f64>>,
        cons: Vec<Vec<Vec<f64>>>,
        signs: &[Sign],
        budget: f64,
        horizon: usize,
    ) -> InstanceSpec {
        let x = rewards.len();
        InstanceSpec {
            horizon,
            num_arms: rewards[0].len(),
            num_contexts: x,
            arrivals: vec![1.0 / x as f64; x],
            constraints: ConstraintSpec {
                resources: signs
                    .iter()
                    .map(|&sign| Resource {
                        sign,
                        budget,
                        is_time: false,
                    })
                    .collect(),
            },
            segments: vec![Segment {
                start: 1,
                arrivals: None,
                model: OutcomeModel::deterministic(rewards, cons),
            }],
            null_arm: None,
        }
        .normalize()
        .unwrap()
    }

    #[test]
    fn half_budget_example() {
        let s = spec(
            vec![vec![1.0, 0.0]],
            vec![vec![vec![1.0], vec![0.0]]],
            &[Sign::Packing],
            50.0,
            100,
        );
        let signs = s.constraints.signs();
        let sol = solve_opt_lp(&LpInput::from_spec(&s, 0, &signs)).unwrap();
        assert_relative_eq!(sol.value, 0.5, epsilon = 1e-9);
        assert_relative_eq!(sol.dist[0][0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(sol.duals[0], 0.5, epsilon = 1e-9);
        assert_eq!(sol.duals[1], 0.0);
        assert!(sol.active.contains(&0));
    }

    #[test]
    fn slack_constraints_pick_argmax() {
        let s = spec(
            vec![vec![0.2, 0.9], vec![0.7, 0.1]],
            vec![vec![vec![0.1], vec![0.2]], vec![vec![0.3], vec![0.0]]],
            &[Sign::Packing],
            100.0,
            100,
        );
        let signs = s.constraints.signs();
        let sol = solve_opt_lp(&LpInput::from_spec(&s, 0, &signs)).unwrap();
        assert_relative_eq!(sol.dist[0][1], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.dist[1][0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(sol.value, 0.8, epsilon = 1e-9);
    }

    #[test]
    fn slater_examples() {
        let s = spec(
            vec![vec![1.0, 0.0]],
            vec![vec![vec![1.0], vec![0.0]]],
            &[Sign::Packing],
            50.0,
            100,
        );
        let signs = s.constraints.signs();
        assert_relative_eq!(
            slater_margin(&LpInput::from_spec(&s, 0, &signs)).unwrap(),
            1.0,
            epsilon = 1e-9
        );
        let s = spec(
            vec![vec![1.0, 0.0]],
            vec![vec![vec![0.5], vec![0.5]]],
            &[Sign::Packing],
            50.0,
            100,
        );
        let signs = s.constraints.signs();
        assert_relative_eq!(
            slater_margin(&LpInput::from_spec(&s, 0, &signs)).unwrap(),
            0.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn covering_constraint_is_respected() {
        let s = spec(
            vec![vec![1.0, 0.0]],
            vec![vec![vec![0.0], vec![1.0]]],
            &[Sign::Covering],
            25.0,
            100,
        );
        let signs = s.constraints.signs();
        let sol = solve_opt_lp(&LpInput::from_spec(&s, 0, &signs)).unwrap();
        assert_relative_eq!(sol.value, 0.75, epsilon = 1e-9);
        assert!(sol.duals[0] > 0.0);
    }

    #[test]
    fn infeasible_lp_is_reported() {
        let s = spec(
            vec![vec![1.0, 0.0]],
            vec![vec![vec![0.1], vec![0.1]]],
            &[Sign::Covering],
            50.0,
            100,
        );
        let signs = s.constraints.signs();
        assert_eq!(solve_opt_lp(&LpInput::from_spec(&s, 0, &signs)), Err(Error::Infeasible));
    }

    #[test]
    fn pacing_sums_segment_values() {
        let mut s = spec(
            vec![vec![1.0, 0.0]],
            vec![vec![vec![1.0], vec![0.0]]],
            &[Sign::Packing],
            50.0,
            200,
        );
        let mut second = s.segments[0].clone();
        second.start = 101;
        second.model.reward = vec![vec![0.4, 0.0]];
        s.segments.push(second);
        // per-round values 0.25 and 0.1
        assert_relative_eq!(pacing_benchmark(&s).unwrap(), 35.0, epsilon = 1e-9);
        let mut swapped = s.clone();
        let m0 = swapped.segments[0].model.clone();
        swapped.segments[0].model = swapped.segments[1].model.clone();
        swapped.segments[1].model = m0;
        assert_relative_eq!(pacing_benchmark(&swapped).unwrap(), 35.0, epsilon = 1e-9);
    }

    #[test]
    fn conc_reg_examples() {
        let t = 1000;
        assert_relative_eq!(
            conc_reg(t, 1000.0, 1.0, 1, 2, 1.0 / 1000.0, 1.0),
            (1000.0 * (1e6f64).ln()).sqrt(),
            epsilon = 1e-9
        );
        assert_eq!(conc_reg(t, 10.0, 3.0, 2, 2, 0.1, 0.0), 0.0);
    }
}
