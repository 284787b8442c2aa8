#![allow(dead_code)]

use cbwlc::env::InstanceSpec;
use cbwlc::lagrangian::EtaMode;
use cbwlc::orchestrator::{run, RunConfig, RunLog, RunMode, RunSetup};
use serde_json::{json, Value};

/// Parse and normalise a JSON instance.
pub fn instance(v: Value) -> InstanceSpec {
    serde_json::from_value::<InstanceSpec>(v)
        .expect("valid instance json")
        .normalize()
        .expect("normalisable")
}

/// One context, one segment, Bernoulli noise on every coordinate.
pub fn single_context(
    horizon: usize,
    reward: &[f64],
    consumption: &[Vec<f64>],
    signs: &[i32],
    budget: f64,
) -> InstanceSpec {
    let d = signs.len();
    instance(json!({
        "horizon": horizon,
        "num_arms": reward.len(),
        "num_contexts": 1,
        "arrivals": [1.0],
        "constraints": signs.iter().map(|s| json!({"sign": s, "budget": budget})).collect::<Vec<_>>(),
        "segments": [{"start": 1, "model": {
            "reward": [reward],
            "consumption": [consumption],
            "noise": vec![json!({"kind": "bernoulli"}); d + 1],
        }}],
    }))
}

/// Packing + covering, three arms, `B = T/2`; Slater margin 0.4.
pub fn stationary(horizon: usize) -> InstanceSpec {
    single_context(
        horizon,
        &[0.9, 0.5, 0.1],
        &[vec![0.8, 0.6], vec![0.2, 0.7], vec![0.0, 0.2]],
        &[1, -1],
        horizon as f64 / 2.0,
    )
}

/// One packing resource, `B = 0.4 T`, arm 3 is the null arm.
pub fn with_null_arm(horizon: usize) -> InstanceSpec {
    let mut raw = serde_json::to_value(single_context(
        horizon,
        &[0.9, 0.2, 0.1, 0.0],
        &[vec![0.8], vec![0.6], vec![0.5], vec![0.0]],
        &[1],
        0.4 * horizon as f64,
    ))
    .unwrap();
    raw["null_arm"] = json!(3);
    serde_json::from_value(raw).unwrap()
}

pub fn config(mode: RunMode, eta: EtaMode, seed: u64) -> RunConfig {
    RunConfig {
        mode,
        eta,
        delta: 0.05,
        seed,
    }
}

/// EXP3.P against Hedge.
pub fn run_exp3p_hedge(spec: &InstanceSpec, cfg: &RunConfig) -> RunLog {
    let setup = RunSetup::new(spec, cfg).unwrap();
    let primal = setup.bandit_primal(spec.num_arms, spec.horizon, cfg.delta, None);
    let dual = setup.dual(spec.horizon, None);
    run(spec, primal, dual, setup, cfg.seed).unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
