//! LP benchmarks and saddle-point diagnostics against independent oracles.

mod common;

use cbwlc::benchmark::saddle::{exact_saddle_lambda, LagrangianGame};
use cbwlc::benchmark::{benchmarks, check_saddle_point, slater_margin, solve_opt_lp, LpInput};
use cbwlc::env::InstanceSpec;
use cbwlc::lagrangian::{EtaMode, LagrangeParams};
use cbwlc::orchestrator::RunMode;
use proptest::prelude::*;
use serde_json::json;

use common::{config, median, run_exp3p_hedge, stationary, with_null_arm};

/// Largest `min_i σ_i (1 − (T/B) c_i(D))` over a grid on the 3-arm simplex.
fn grid_margin(spec: &InstanceSpec, step: usize) -> f64 {
    let model = &spec.segments[0].model;
    let signs = spec.constraints.signs();
    let time = spec.constraints.time_resource();
    let mut best = f64::NEG_INFINITY;
    for i in 0..=step {
        for j in 0..=step - i {
            let p = [
                i as f64 / step as f64,
                j as f64 / step as f64,
                (step - i - j) as f64 / step as f64,
            ];
            let worst = (0..signs.len())
                .filter(|&r| Some(r) != time)
                .map(|r| {
                    let c: f64 = (0..3).map(|a| p[a] * model.consumption[0][a][r]).sum();
                    signs[r] * (1.0 - spec.ratio() * c)
                })
                .fold(f64::INFINITY, f64::min);
            best = best.max(worst);
        }
    }
    best
}

#[test]
fn slater_margin_matches_grid_search() {
    let cases = [
        stationary(1_000),
        common::single_context(
            1_000,
            &[0.5, 0.4, 0.1],
            &[vec![0.9, 0.1], vec![0.1, 0.9], vec![0.5, 0.5]],
            &[1, 1],
            400.0,
        ),
        common::single_context(
            1_000,
            &[0.5, 0.4, 0.1],
            &[vec![0.9, 0.3], vec![0.2, 0.8], vec![0.3, 0.6]],
            &[1, -1],
            500.0,
        ),
    ];
    for spec in &cases {
        let signs = spec.constraints.signs();
        let zeta = slater_margin(&LpInput::from_spec(spec, 0, &signs)).unwrap();
        let grid = grid_margin(spec, 400);
        // The grid point nearest the optimum is within T/B · step of it.
        let tol = spec.ratio() / 400.0;
        assert!(zeta >= grid - 1e-9 && zeta <= grid + tol, "LP {zeta} vs grid {grid}");
    }
}

#[test]
fn saddle_residuals_shrink_with_the_horizon() {
    // Two well-separated arms mixed by a binding budget; ζ = 0.8.
    let instance = |t: usize| common::single_context(t, &[0.9, 0.1], &[vec![0.9], vec![0.1]], &[1], t as f64 / 2.0);
    let eta = EtaMode::Slater { zeta: 0.8 };
    let nu = |t: usize, seed: u64| {
        let spec = instance(t);
        let log = run_exp3p_hedge(&spec, &config(RunMode::Standard, eta, seed));
        check_saddle_point(&log, &spec, f64::INFINITY).unwrap().nu
    };
    let small = median((0..15).map(|s| nu(2_500, s)).collect());
    let large = median((0..15).map(|s| nu(10_000, 100 + s)).collect());
    assert!(large / small <= 0.7, "residual {small} → {large}");
}

#[test]
fn corollary_holds_on_logged_runs() {
    let spec = stationary(5_000);
    for seed in 0..5 {
        let log = run_exp3p_hedge(&spec, &config(RunMode::Standard, EtaMode::Slater { zeta: 0.4 }, seed));
        let report = check_saddle_point(&log, &spec, f64::INFINITY).unwrap();
        assert!(report.lemma1a_holds && report.corollary_holds, "{report:?}");
    }
}

#[test]
fn realised_reward_never_beats_the_benchmark_beyond_noise() {
    // Hard stopping keeps every run feasible, so the LP value caps the
    // expected reward; Bernoulli rewards have standard deviation ≤ √T / 2.
    let t = 10_000;
    let spec = with_null_arm(t);
    let opt = benchmarks(&spec).unwrap().opt;
    let slack = 4.0 * (t as f64).sqrt() / 2.0;
    for seed in 0..50 {
        let log = run_exp3p_hedge(&spec, &config(RunMode::HardStop, EtaMode::HardStop, seed));
        let reward = log.total_reward();
        assert!(reward <= opt + slack, "seed {seed}: {reward} > {opt} + {slack}");
    }
}

fn random_spec(
    rewards: Vec<f64>,
    cons: Vec<f64>,
    signs: Vec<i32>,
    contexts: usize,
    arms: usize,
    budget_frac: f64,
) -> InstanceSpec {
    let d = signs.len();
    let reward: Vec<Vec<f64>> = rewards.chunks(arms).map(<[f64]>::to_vec).collect();
    let consumption: Vec<Vec<Vec<f64>>> = cons
        .chunks(arms * d)
        .map(|x| x.chunks(d).map(<[f64]>::to_vec).collect())
        .collect();
    common::instance(json!({
        "horizon": 1_000,
        "num_arms": arms,
        "num_contexts": contexts,
        "arrivals": vec![1.0 / contexts as f64; contexts],
        "constraints": signs.iter().map(|s| json!({"sign": s, "budget": budget_frac * 1_000.0})).collect::<Vec<_>>(),
        "segments": [{"start": 1, "model": {"reward": reward, "consumption": consumption}}],
    }))
}

fn lp_case() -> impl Strategy<Value = InstanceSpec> {
    (1usize..=3, 2usize..=4, 1usize..=3, 0.2f64..0.8).prop_flat_map(|(x, k, d, frac)| {
        (
            proptest::collection::vec(0.0f64..1.0, x * k),
            proptest::collection::vec(0.0f64..1.0, x * k * d),
            proptest::collection::vec(prop_oneof![Just(1), Just(-1)], d),
        )
            .prop_map(move |(r, c, s)| random_spec(r, c, s, x, k, frac))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_optimum_dominates_feasible_mixtures(spec in lp_case(), weights in proptest::collection::vec(0.01f64..1.0, 12)) {
        let signs = spec.constraints.signs();
        let input = LpInput::from_spec(&spec, 0, &signs);
        let Ok(sol) = solve_opt_lp(&input) else { return Ok(()) };
        prop_assert!(input.normalized_slacks(&sol.dist).iter().all(|&s| s <= 1e-7));
        let k = spec.num_arms;
        let dist: Vec<Vec<f64>> = (0..spec.num_contexts)
            .map(|x| {
                let w: Vec<f64> = (0..k).map(|a| weights[(x * k + a) % weights.len()]).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|v| v / s).collect()
            })
            .collect();
        if input.normalized_slacks(&dist).iter().all(|&s| s <= 0.0) {
            prop_assert!(input.reward(&dist) <= sol.value + 1e-9);
        }
    }

    #[test]
    fn dual_mass_is_bounded_by_the_inverse_margin(spec in lp_case()) {
        let signs = spec.constraints.signs();
        let input = LpInput::from_spec(&spec, 0, &signs);
        let Ok(zeta) = slater_margin(&input) else { return Ok(()) };
        prop_assume!(zeta > 0.05 && zeta.is_finite());
        let sol = solve_opt_lp(&input).unwrap();
        let mass: f64 = sol.duals.iter().sum();
        prop_assert!(mass <= 1.0 / zeta + 1e-7, "mass {} vs 1/ζ {}", mass, 1.0 / zeta);

        // With η ≥ 2/ζ the LP optimum and rescaled duals form an exact saddle point.
        let eta = (2.0 / zeta).max(1.0);
        let params = LagrangeParams::new(eta, spec.ratio()).unwrap();
        let lambda = exact_saddle_lambda(&sol.duals, spec.constraints.time_resource().unwrap(), eta);
        let game = LagrangianGame::from_model(input.model, input.arrivals, &params, &signs);
        let (p, d) = game.residuals(&sol.dist, &lambda);
        prop_assert!(p <= 1e-7 && d <= 1e-7, "residuals {} {}", p, d);
    }
}
