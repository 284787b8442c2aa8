//! Round-level properties of the primal-dual game loop.

mod common;

use cbwlc::env::{sample_round, OutcomeMatrix};
use cbwlc::lagrangian::{lagrange_payoff, EtaMode};
use cbwlc::orchestrator::{run, GameLoop, RunMode, RunSetup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{config, run_exp3p_hedge, stationary, with_null_arm};

const SLATER: EtaMode = EtaMode::Slater { zeta: 0.4 };

#[test]
fn lambda_depends_only_on_past_rounds() {
    let spec = stationary(500);
    let cfg = config(RunMode::Standard, SLATER, 4);
    let setup = RunSetup::new(&spec, &cfg).unwrap();
    let primal = setup.bandit_primal(spec.num_arms, spec.horizon, cfg.delta, None);
    let dual = setup.dual(spec.horizon, None);
    let mut game = GameLoop::new(&spec, setup.clone(), primal, dual, cfg.seed);
    for _ in 0..100 {
        game.step().unwrap();
    }
    let before = game.next_lambda();
    let (parts, _) = game.into_parts();

    // Same state, different round-t realisations: rows permuted across arms.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (x, m) = sample_round(&spec, 101, &mut rng);
    let k = spec.num_arms;
    for shift in 0..k {
        let rows: Vec<Vec<f64>> = (0..k).map(|a| m.row((a + shift) % k).to_vec()).collect();
        let mut g = GameLoop::from_parts(&spec, setup.clone(), parts.clone());
        g.step_with_sample(x, OutcomeMatrix::from_rows(&rows)).unwrap();
        let (_, rounds) = g.into_parts();
        assert_eq!(rounds[0].lambda, before);
    }
}

#[test]
fn restart_from_parts_continues_identically() {
    let spec = stationary(1_000);
    let cfg = config(RunMode::Standard, SLATER, 8);
    let full = run_exp3p_hedge(&spec, &cfg);

    let setup = RunSetup::new(&spec, &cfg).unwrap();
    let primal = setup.bandit_primal(spec.num_arms, spec.horizon, cfg.delta, None);
    let dual = setup.dual(spec.horizon, None);
    let mut first = GameLoop::new(&spec, setup.clone(), primal, dual, cfg.seed);
    for _ in 0..377 {
        first.step().unwrap();
    }
    let (parts, mut rounds) = first.into_parts();
    // Transplant the learner states into a fresh loop.
    let mut second = GameLoop::from_parts(&spec, setup, parts);
    second.run_to_end().unwrap();
    rounds.extend(second.finish().rounds);
    assert_eq!(rounds, full.rounds);
}

#[test]
fn runs_are_deterministic_per_seed() {
    let spec = stationary(800);
    let a = run_exp3p_hedge(&spec, &config(RunMode::Standard, SLATER, 21));
    let b = run_exp3p_hedge(&spec, &config(RunMode::Standard, SLATER, 21));
    let c = run_exp3p_hedge(&spec, &config(RunMode::Standard, SLATER, 22));
    assert_eq!(a, b);
    assert_ne!(a.rounds, c.rounds);
}

#[test]
fn logged_payoffs_recompute_from_outcomes() {
    let spec = stationary(1_000);
    let log = run_exp3p_hedge(&spec, &config(RunMode::Standard, SLATER, 2));
    for rec in &log.rounds {
        let row = log.reported_row(rec, rec.arm);
        let v = lagrange_payoff(&row, &rec.lambda, &log.params, &log.signs).unwrap();
        assert!(
            (v - rec.payoff).abs() <= 1e-12,
            "round {}: {v} vs {}",
            rec.round,
            rec.payoff
        );
        assert!(log.params.contains(rec.payoff));
        let weighted: f64 = rec
            .lambda
            .iter()
            .zip(&rec.per_resource_payoffs)
            .map(|(l, p)| l * p)
            .sum();
        assert!((weighted - rec.payoff).abs() <= 1e-12);
    }
}

#[test]
fn hard_stop_keeps_every_prefix_within_budget_plus_one() {
    let mut stopped = 0;
    for seed in 0..20 {
        // A budget of 5% forces an early stop.
        let mut spec = with_null_arm(2_000);
        let b = 0.05 * spec.horizon as f64;
        let t = spec.horizon as f64;
        for r in spec.constraints.resources.iter_mut() {
            r.budget = b;
        }
        for seg in spec.segments.iter_mut() {
            for row in seg.model.consumption.iter_mut().flatten() {
                *row.last_mut().unwrap() = b / t;
            }
        }
        let log = run_exp3p_hedge(&spec, &config(RunMode::HardStop, EtaMode::HardStop, seed));
        stopped += usize::from(log.stop_round.is_some());
        let mut used = 0.0;
        for rec in &log.rounds {
            used += rec.outcome()[1];
            assert!(
                used <= b + 1.0,
                "seed {seed}, round {}: {used} > {}",
                rec.round,
                b + 1.0
            );
        }
        if let Some(s) = log.stop_round {
            assert!(log.rounds[s - 1..].iter().all(|r| r.arm == 3));
        }
    }
    assert_eq!(stopped, 20);
}

#[test]
fn vanishing_margin_recovers_the_standard_run() {
    let spec = stationary(2_000);
    let zeta = 0.4;
    let eps = 1e-12;
    let standard = run_exp3p_hedge(&spec, &config(RunMode::Standard, EtaMode::Fixed { eta: 4.0 / zeta }, 6));
    let zero = run_exp3p_hedge(
        &spec,
        &config(
            RunMode::ZeroViolation { epsilon: eps },
            EtaMode::ZeroViolation { zeta },
            6,
        ),
    );
    let arms = |log: &cbwlc::orchestrator::RunLog| log.rounds.iter().map(|r| r.arm).collect::<Vec<_>>();
    assert_eq!(arms(&standard), arms(&zero));
    assert_eq!(standard.total_reward(), zero.total_reward());
}

#[test]
fn zero_violation_learners_see_a_tighter_problem() {
    let spec = stationary(1_000);
    let zeta = 0.4;
    let cfg = config(
        RunMode::ZeroViolation { epsilon: 0.1 },
        EtaMode::ZeroViolation { zeta },
        1,
    );
    let setup = RunSetup::new(&spec, &cfg).unwrap();
    assert_eq!(setup.reported_budget, 0.9 * spec.budget());
    assert_eq!(setup.params.eta, 4.0 / zeta);
    let primal = setup.bandit_primal(spec.num_arms, spec.horizon, cfg.delta, None);
    let dual = setup.dual(spec.horizon, None);
    let log = run(&spec, primal, dual, setup, cfg.seed).unwrap();
    // The log keeps true outcomes; only the learners' view is shifted.
    for rec in log.rounds.iter().take(50) {
        let reported = log.reported_row(rec, rec.arm);
        assert_eq!(reported[1], rec.outcome()[1]);
        assert!((rec.outcome()[2] - reported[2] - 2.0 * 0.1 * spec.budget() / spec.horizon as f64).abs() < 1e-15);
    }
}
