//! The sample mean of realised Lagrange payoffs matches the expected
//! Lagrangian computed from exact means.

mod common;

use cbwlc::env::sample_round;
use cbwlc::lagrangian::{expected_lagrangian, lagrange_payoff, LagrangeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[test]
fn sample_mean_converges_to_expected_lagrangian() {
    let spec = common::instance(json!({
        "horizon": 1000,
        "num_arms": 3,
        "num_contexts": 2,
        "arrivals": [0.3, 0.7],
        "constraints": [{"sign": 1, "budget": 400.0}, {"sign": -1, "budget": 500.0}],
        "segments": [{"start": 1, "model": {
            "reward": [[0.9, 0.4, 0.1], [0.2, 0.8, 0.5]],
            "consumption": [[[0.7, 0.6], [0.3, 0.9], [0.1, 0.2]], [[0.5, 0.4], [0.9, 0.1], [0.0, 0.8]]],
            "noise": [{"kind": "bernoulli"}, {"kind": "bernoulli"}, {"kind": "bernoulli"}],
        }}],
    }));
    let model = &spec.segments[0].model;
    let signs = spec.constraints.signs();
    let params = LagrangeParams::new(2.5, spec.ratio()).unwrap();
    let dist = vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]];
    let lambda = [0.5, 0.3, 0.2];

    let expected = expected_lagrangian(&dist, &lambda, model, &spec.arrivals, &params, &signs);
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut sum, mut sq) = (0.0, 0.0);
    for t in 0..n {
        let (x, m) = sample_round(&spec, 1 + t % spec.horizon, &mut rng);
        let u: f64 = rng.random();
        let mut arm = 0;
        let mut acc = dist[x][0];
        while u >= acc && arm + 1 < dist[x].len() {
            arm += 1;
            acc += dist[x][arm];
        }
        let v = lagrange_payoff(m.row(arm), &lambda, &params, &signs).unwrap();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let sd = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 4.0 * sd,
        "mean {mean}, expected {expected}, sd {sd}"
    );
}
