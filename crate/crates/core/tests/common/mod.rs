#![allow(dead_code)]

use zeroacf::dgp::{simulate, Deltas, DgpConfig, Innovation};

pub const ORACLE_LENGTH: usize = 1_000_000;

/// Sample correlation of `(r_{t−1}, r_t)` over consecutive pairs that are
/// both non-zero.
pub fn nonzero_pair_correlation(r: &[f64]) -> f64 {
    let pairs: Vec<(f64, f64)> = r
        .windows(2)
        .filter(|w| w[0] != 0.0 && w[1] != 0.0)
        .map(|w| (w[0], w[1]))
        .collect();
    let k = pairs.len() as f64;
    let (mx, my) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / k, b + y / k));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub const ORACLE_RUNS: u64 = 20;

/// Lag-1 correlation of the innovations among non-zero pairs, averaged over
/// independent long trajectories with constant variance and certain trading.
pub fn innovation_correlation(innovation: Innovation) -> f64 {
    let deltas = Deltas {
        delta1: 1.0,
        delta2: 1.0,
        delta3: 1.0,
        delta4: 1.0,
    };
    let total: f64 = (0..ORACLE_RUNS)
        .map(|seed| {
            let config = DgpConfig::custom(deltas, ORACLE_LENGTH, innovation, seed).unwrap();
            nonzero_pair_correlation(simulate(&config).unwrap().values())
        })
        .sum();
    total / ORACLE_RUNS as f64
}
