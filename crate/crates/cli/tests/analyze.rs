mod common;

use common::{assert_valid, fixture, report_validator, scratch, stdout_json, zeroacf};
use serde_json::Value;

fn analyze(name: &str, extra: &[&str]) -> Value {
    let input = fixture(name);
    let mut args = vec!["analyze", "--input", input.to_str().unwrap()];
    args.extend_from_slice(extra);
    stdout_json(&zeroacf(&args))
}

#[test]
fn golden_report_is_reproduced_exactly() {
    let input = fixture("case_iv_seed42.csv");
    let out = zeroacf(&["analyze", "--input", input.to_str().unwrap()]);
    assert!(out.status.success());
    let golden = std::fs::read(fixture("case_iv_seed42.golden.json")).unwrap();
    assert!(out.stdout == golden, "report drifted from the golden file");
}

#[test]
fn golden_report_matches_schema() {
    let golden: Value =
        serde_json::from_slice(&std::fs::read(fixture("case_iv_seed42.golden.json")).unwrap())
            .unwrap();
    assert_valid(&report_validator(), &golden);
}

#[test]
fn report_carries_the_table_columns() {
    let report = analyze("case_iv_seed42.csv", &[]);
    assert_eq!(report["series"]["n"], 1500);
    let zf = report["series"]["zero_fraction"].as_f64().unwrap();
    assert!((0.0..1.0).contains(&zf));
    for key in [
        "rho0",
        "rho_pr",
        "rho_vpr",
        "ci_halfwidth_pr",
        "ci_halfwidth_vpr",
    ] {
        assert_eq!(report["acf"][key].as_array().unwrap().len(), 1, "{key}");
    }
    assert!(report["index"]["kappa"].as_f64().unwrap() >= 0.0);
    assert_eq!(report["kernel_plan"]["kernel"], "epanechnikov");
    assert_eq!(report["acf"]["level"], 0.95);
}

#[test]
fn nonstationary_trading_suggests_vpr() {
    let report = analyze("case_i_seed42.csv", &[]);
    assert_valid(&report_validator(), &report);
    let kappa = report["index"]["kappa"].as_f64().unwrap();
    let p95 = report["advisory"]["reference"]["p95"].as_f64().unwrap();
    assert!(kappa > p95, "kappa {kappa} vs null p95 {p95}");
    assert_eq!(report["advisory"]["suggested"], "vpr");
}

#[test]
fn stationary_trajectory_suggests_pr() {
    let report = analyze("case_iv_seed42.csv", &[]);
    assert_eq!(report["advisory"]["suggested"], "pr");
}

#[test]
fn two_prices_force_lag_zero() {
    let report = analyze("two_prices.csv", &["--lags", "3"]);
    assert_valid(&report_validator(), &report);
    assert_eq!(report["m"], 0);
    assert_eq!(report["series"]["n"], 1);
    assert!(report["bands"].as_array().unwrap().is_empty());
    assert!(!report["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn lag_table_csv_has_one_row_per_lag() {
    let dir = scratch("lag_table");
    let out = dir.join("lags.csv");
    let report = analyze(
        "case_iv_seed42.csv",
        &[
            "--lags",
            "3",
            "--bandwidth",
            "0.2",
            "--reference-trials",
            "0",
            "--out",
            out.to_str().unwrap(),
        ],
    );
    assert_valid(&report_validator(), &report);
    assert!(report["advisory"]["suggested"].is_null());
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[2][0], "3");
}

#[test]
fn kernel_and_level_flags_reach_the_report() {
    let report = analyze(
        "case_iv_seed42.csv",
        &[
            "--kernel",
            "tri",
            "--level",
            "0.9",
            "--grid",
            "0.05:0.5:5",
            "--reference-trials",
            "0",
        ],
    );
    assert_valid(&report_validator(), &report);
    assert_eq!(report["kernel_plan"]["kernel"], "triangular");
    assert_eq!(
        report["kernel_plan"]["selection"]["grid"]
            .as_array()
            .unwrap()
            .len(),
        5
    );
    assert_eq!(report["acf"]["level"], 0.9);
}
