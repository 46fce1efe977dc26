//! Shared fixtures for the integration and acceptance tests.

#![allow(dead_code)]

use onramp_core::analysis::config_for_targets;
use onramp_core::{
    analyze, classify, AnalysisSummary64, Classification, CostCoefficients64, ErrorInterval64,
    OnRamp64, OnRampConfig64,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub const CALIBRATED_JSON: &str =
    r#"{"n0": 0.37, "c1t": 1, "c1m": 21.3, "c2t": 1, "c2m": 1, "mu": 2.4, "gamma": 8.6}"#;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

pub fn ramp_of(config: OnRampConfig64) -> (OnRamp64, AnalysisSummary64) {
    let ramp = OnRamp64::new(config);
    let summary = analyze(&ramp).expect("finite structural quantities");
    (ramp, summary)
}

pub fn calibrated() -> (OnRamp64, AnalysisSummary64) {
    ramp_of(OnRampConfig64::new(0.37, CostCoefficients64::calibrated()).unwrap())
}

/// Uniform draw over the sampling box, without regard to membership.
pub fn random_config(rng: &mut TestRng) -> OnRampConfig64 {
    let costs = CostCoefficients64 {
        c1t: rng.gen_range(0.5..2.0),
        c1m: rng.gen_range(0.0..40.0),
        c2t: rng.gen_range(0.5..2.0),
        c2m: rng.gen_range(0.0..5.0),
        mu: rng.gen_range(0.5..5.0),
        gamma: rng.gen_range(0.5..15.0),
    };
    OnRampConfig64::new(rng.gen_range(0.05..0.95), costs).unwrap()
}

/// Rejection-samples a configuration in the meaningful set.
pub fn random_in_g(rng: &mut TestRng) -> (OnRamp64, AnalysisSummary64) {
    loop {
        let (ramp, summary) = ramp_of(random_config(rng));
        if summary.membership.is_in_g() {
            return (ramp, summary);
        }
    }
}

pub fn random_interval(rng: &mut TestRng) -> ErrorInterval64 {
    let lower = rng.gen_range(0.2..1.0);
    let upper = rng.gen_range(1.0..5.0);
    ErrorInterval64::new(lower, upper).unwrap()
}

/// A random meaningful configuration and interval that classify as `G2`.
pub fn random_g2(rng: &mut TestRng) -> (OnRamp64, AnalysisSummary64, ErrorInterval64) {
    loop {
        let (ramp, summary) = random_in_g(rng);
        let interval = random_interval(rng);
        if classify(&summary, &interval) == Classification::InG2 {
            return (ramp, summary, interval);
        }
    }
}

/// A configuration built to classify as `G1` under a random interval.
///
/// `G1` needs `1 < Pi < sqrt(e_upper / e_lower)`, so `Pi` is drawn inside
/// that range and `Delta` follows from `Phi` and `Pi`.
pub fn constructed_g1(rng: &mut TestRng) -> (OnRamp64, AnalysisSummary64, ErrorInterval64) {
    for _ in 0..100_000 {
        let lower: f64 = rng.gen_range(0.2..0.9);
        let upper: f64 = rng.gen_range(1.2..4.0);
        let ratio: f64 = (upper / lower).sqrt();
        let pi = 1.0 + (ratio - 1.0) * rng.gen_range(0.1..0.9);
        let phi: f64 = rng.gen_range(0.5..0.9);
        let delta = (1.0 + phi + (1.0 - phi) / pi) / 2.0;
        let n0 = rng.gen_range(0.5..0.95);
        let c2m = rng.gen_range(0.0..2.0);
        let k_s = rng.gen_range(0.1..20.0);
        let Ok(config) = config_for_targets(phi, delta, n0, c2m, k_s) else {
            continue;
        };
        let (ramp, summary) = ramp_of(config);
        let interval = ErrorInterval64::new(lower, upper).unwrap();
        if classify(&summary, &interval) == Classification::InG1 {
            assert!((summary.phi - phi).abs() < 1e-9 && (summary.delta - delta).abs() < 1e-9);
            return (ramp, summary, interval);
        }
    }
    panic!("no G1 configuration found");
}
