//! Approximate saddle points of the rescaled Lagrangian `L^η(D, λ)`.
//!
//! For `λ` on the simplex the rescaled Lagrangian is bilinear:
//! `L^η(D, λ) = Σ_x p(x) Σ_a D(a|x) Σ_i λ_i G_i(x, a)` with
//! `G_i(x, a) = r(x, a) + η σ_i (1 − (T/B) c_i(x, a))`. Best responses are
//! therefore per-context argmaxes for the primal and a vertex for the dual.

use serde::{Deserialize, Serialize};

use super::{slater_margin, solve_opt_lp, LpInput};
use crate::env::{InstanceSpec, OutcomeModel};
use crate::lagrangian::LagrangeParams;
use crate::orchestrator::RunLog;
use crate::Result;

const CHECK_TOL: f64 = 1e-9;

/// A bilinear game between per-context arm distributions and the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianGame {
    pub arrivals: Vec<f64>,
    /// `coef[x][a][i]`.
    pub coef: Vec<Vec<Vec<f64>>>,
}

impl LagrangianGame {
    pub fn from_model(model: &OutcomeModel, arrivals: &[f64], params: &LagrangeParams, signs: &[f64]) -> Self {
        let coef = model
            .reward
            .iter()
            .zip(&model.consumption)
            .map(|(rx, cx)| {
                rx.iter()
                    .zip(cx)
                    .map(|(r, c)| {
                        signs
                            .iter()
                            .zip(c)
                            .map(|(s, ci)| r + params.eta * s * (1.0 - params.ratio * ci))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            arrivals: arrivals.to_vec(),
            coef,
        }
    }

    /// Zero-sum matrix game: the row player maximises `m[a][i]`.
    pub fn from_matrix(m: Vec<Vec<f64>>) -> Self {
        Self {
            arrivals: vec![1.0],
            coef: vec![m],
        }
    }

    fn dual_dim(&self) -> usize {
        self.coef[0][0].len()
    }

    pub fn value(&self, dist: &[Vec<f64>], lambda: &[f64]) -> f64 {
        (0..self.dual_dim())
            .map(|i| lambda[i] * self.vertex_value(dist, i))
            .sum()
    }

    /// `L(D, e_i)`.
    pub fn vertex_value(&self, dist: &[Vec<f64>], i: usize) -> f64 {
        let mut v = 0.0;
        for ((px, dx), cx) in self.arrivals.iter().zip(dist).zip(&self.coef) {
            for (d, g) in dx.iter().zip(cx) {
                v += px * d * g[i];
            }
        }
        v
    }

    /// `sup_D L(D, λ)`.
    pub fn best_response_value(&self, lambda: &[f64]) -> f64 {
        self.arrivals
            .iter()
            .zip(&self.coef)
            .map(|(px, cx)| {
                px * cx
                    .iter()
                    .map(|g| g.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum()
    }

    /// `inf_{λ ∈ Δ} L(D, λ)`.
    pub fn min_dual_value(&self, dist: &[Vec<f64>]) -> f64 {
        (0..self.dual_dim())
            .map(|i| self.vertex_value(dist, i))
            .fold(f64::INFINITY, f64::min)
    }

    /// `(sup_D L(D, λ) − L(D̄, λ), L(D̄, λ) − inf_λ' L(D̄, λ'))`, both ≥ 0.
    pub fn residuals(&self, dist: &[Vec<f64>], lambda: &[f64]) -> (f64, f64) {
        let v = self.value(dist, lambda);
        (
            (self.best_response_value(lambda) - v).max(0.0),
            (v - self.min_dual_value(dist)).max(0.0),
        )
    }
}

/// `(η/B) V_max(D) = η max_i [σ_i ((T/B) c_i(D) − 1)]₊`.
pub fn scaled_max_violation(input: &LpInput, dist: &[Vec<f64>], eta: f64) -> f64 {
    eta * input.normalized_slacks(dist).into_iter().fold(0.0, f64::max)
}

/// An exact saddle point of `L^η` from an LP optimum, valid when
/// `η ≥ ‖λ*‖₁`: the surplus dual mass sits on the (always tight) time
/// resource.
pub fn exact_saddle_lambda(duals: &[f64], time: usize, eta: f64) -> Vec<f64> {
    let mass: f64 = duals.iter().sum();
    let mut lambda: Vec<f64> = duals.iter().map(|v| v / eta).collect();
    lambda[time] += (eta - mass) / eta;
    lambda
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleReport {
    pub is_saddle: bool,
    pub nu: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// `r(D*) − r(p̄)`, checked against `2ν`.
    pub reward_gap: f64,
    pub lemma1a_holds: bool,
    /// `(η/B) V_max(p̄)`.
    pub scaled_violation: f64,
    /// `4ν` when `η ≥ 2/ζ`, otherwise `2ν + 1`.
    pub violation_bound: f64,
    pub corollary_holds: bool,
}

/// Average play and average dual of the active rounds of each segment,
/// checked as an approximate saddle point of the game the learners played.
///
/// The average play at context `x` is the mean of the per-round
/// distributions over rounds where `x` arrived, evaluated under the true
/// arrival probabilities. Segment results are combined weighted by length.
pub fn check_saddle_point(log: &RunLog, spec: &InstanceSpec, nu_budget: f64) -> Result<SaddleReport> {
    let rounds = log.active_rounds();
    let k = spec.num_arms;
    let d = log.signs.len();
    let budget = spec.horizon as f64 / log.params.ratio;
    let mut acc = SaddleReport {
        is_saddle: true,
        nu: 0.0,
        primal_residual: 0.0,
        dual_residual: 0.0,
        reward_gap: f64::NEG_INFINITY,
        lemma1a_holds: true,
        scaled_violation: 0.0,
        violation_bound: f64::INFINITY,
        corollary_holds: true,
    };
    let mut weight = 0.0;
    for (j, (start, end)) in spec.segment_bounds().into_iter().enumerate() {
        let seg: Vec<_> = rounds.iter().filter(|r| r.round >= start && r.round <= end).collect();
        if seg.is_empty() {
            continue;
        }
        let mut sums = vec![vec![0.0; k]; spec.num_contexts];
        let mut counts = vec![0usize; spec.num_contexts];
        let mut lambda_bar = vec![0.0; d];
        for r in &seg {
            counts[r.context] += 1;
            match &r.distribution {
                Some(p) => {
                    for (s, v) in sums[r.context].iter_mut().zip(p) {
                        *s += v;
                    }
                }
                None => sums[r.context][r.arm] += 1.0,
            }
            for (l, v) in lambda_bar.iter_mut().zip(&r.lambda) {
                *l += v;
            }
        }
        let n = seg.len() as f64;
        lambda_bar.iter_mut().for_each(|l| *l /= n);
        let p_bar: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .map(|(row, &c)| {
                if c == 0 {
                    vec![1.0 / k as f64; k]
                } else {
                    row.into_iter().map(|v| v / c as f64).collect()
                }
            })
            .collect();

        let model = spec.segments[j].model.shifted(&log.reported_shift);
        let arrivals = spec.segment_arrivals(j);
        let input = LpInput {
            model: &model,
            arrivals,
            signs: &log.signs,
            time: spec.constraints.time_resource(),
            horizon: spec.horizon,
            budget,
        };
        let game = LagrangianGame::from_model(&model, arrivals, &log.params, &log.signs);
        let (pr, dr) = game.residuals(&p_bar, &lambda_bar);
        let nu = pr.max(dr);
        let opt = solve_opt_lp(&input)?;
        let gap = opt.value - input.reward(&p_bar);
        let zeta = slater_margin(&input)?;
        let scaled = scaled_max_violation(&input, &p_bar, log.params.eta);
        let bound = if zeta > 0.0 && log.params.eta >= 2.0 / zeta - CHECK_TOL {
            4.0 * nu
        } else {
            2.0 * nu + 1.0
        };
        let len = (end + 1 - start) as f64;
        weight += len;
        acc.nu += len * nu;
        acc.primal_residual += len * pr;
        acc.dual_residual += len * dr;
        acc.reward_gap = acc.reward_gap.max(gap);
        acc.lemma1a_holds &= gap <= 2.0 * nu + CHECK_TOL;
        acc.scaled_violation = acc.scaled_violation.max(scaled);
        acc.violation_bound = acc.violation_bound.min(bound);
        acc.corollary_holds &= scaled <= bound + CHECK_TOL;
    }
    if weight > 0.0 {
        acc.nu /= weight;
        acc.primal_residual /= weight;
        acc.dual_residual /= weight;
    }
    acc.is_saddle = acc.nu <= nu_budget;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ConstraintSpec, Resource, Segment, Sign};
    use approx::assert_relative_eq;

    #[test]
    fn matching_pennies_nash_has_zero_residuals() {
        let g = LagrangianGame::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let (p, d) = g.residuals(&[vec![0.5, 0.5]], &[0.5, 0.5]);
        assert_eq!(p, 0.0);
        assert_eq!(d, 0.0);
        let (p, d) = g.residuals(&[vec![1.0, 0.0]], &[0.5, 0.5]);
        assert!(p >= 0.0 && d >= 0.0);
        assert_relative_eq!(p.max(d), 0.5);
    }

    #[test]
    fn lp_optimum_is_an_exact_saddle_point() {
        let spec = InstanceSpec {
            horizon: 100,
            num_arms: 3,
            num_contexts: 1,
            arrivals: vec![1.0],
            constraints: ConstraintSpec {
                resources: vec![
                    Resource {
                        sign: Sign::Packing,
                        budget: 50.0,
                        is_time: false,
                    },
                    Resource {
                        sign: Sign::Covering,
                        budget: 50.0,
                        is_time: false,
                    },
                ],
            },
            segments: vec![Segment {
                start: 1,
                arrivals: None,
                model: OutcomeModel::deterministic(
                    vec![vec![0.9, 0.5, 0.1]],
                    vec![vec![vec![0.8, 0.6], vec![0.2, 0.7], vec![0.0, 0.2]]],
                ),
            }],
            null_arm: None,
        }
        .normalize()
        .unwrap();
        let signs = spec.constraints.signs();
        let input = LpInput::from_spec(&spec, 0, &signs);
        let sol = solve_opt_lp(&input).unwrap();
        let zeta = slater_margin(&input).unwrap();
        let eta = 2.0 / zeta;
        assert!(sol.duals.iter().sum::<f64>() <= 1.0 / zeta + 1e-9);
        let params = LagrangeParams::new(eta, input.horizon as f64 / input.budget).unwrap();
        let lambda = exact_saddle_lambda(&sol.duals, spec.constraints.time_resource().unwrap(), eta);
        let game = LagrangianGame::from_model(input.model, input.arrivals, &params, &signs);
        let (p, d) = game.residuals(&sol.dist, &lambda);
        assert!(p <= 1e-9 && d <= 1e-9, "residuals {p} {d}");
    }
}
