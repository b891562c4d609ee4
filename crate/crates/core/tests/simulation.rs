use zeroacf::dgp::{Case, DgpConfig, Innovation};
use zeroacf::montecarlo::{run_monte_carlo, McSummary};
use zeroacf::{BandwidthPolicy, McSettings};

fn run_with(
    case: Case,
    n: usize,
    trials: usize,
    seed: u64,
    bandwidth: BandwidthPolicy,
) -> McSummary {
    let config = DgpConfig::preset(case, n, Innovation::CorrelatedAr, seed);
    let settings = McSettings {
        trials,
        bandwidth,
        ..McSettings::default()
    };
    let summary = run_monte_carlo(&config, &settings).unwrap();
    assert_eq!(summary.failures, 0);
    summary
}

fn run(case: Case, n: usize, trials: usize, seed: u64) -> McSummary {
    run_with(case, n, trials, seed, BandwidthPolicy::default())
}

#[test]
fn stationary_delta_is_small_for_long_series() {
    let summary = run_with(
        Case::IV,
        10_000,
        200,
        3,
        BandwidthPolicy::Fixed { bandwidth: 0.1 },
    );
    let small = summary
        .outcomes
        .iter()
        .filter(|o| o.kappa.sqrt() < 0.05)
        .count();
    assert!(
        small as f64 >= 0.95 * summary.outcomes.len() as f64,
        "{small} of {}",
        summary.outcomes.len()
    );
}

#[test]
fn constant_probability_cases_agree_on_average() {
    for case in [Case::II, Case::III, Case::IV] {
        let summary = run(case, 1500, 1000, 4);
        let pr = summary.method("pr").unwrap().mean;
        let vpr = summary.method("vpr").unwrap().mean;
        assert!((pr - vpr).abs() < 0.01, "{case:?}: pr {pr} vpr {vpr}");
    }
}

#[test]
fn kappa_stays_away_from_zero_under_nonstationary_trading() {
    let small = run(Case::I, 500, 300, 5).kappa.quantiles.median;
    let large = run(Case::I, 3000, 300, 5).kappa.quantiles.median;
    assert!(small > 0.02 && large > 0.02, "{small} {large}");
}
