//! End-to-end analysis of one return series: smoothing, the three
//! autocorrelation estimates, null bands, the index and an advisory line.

use serde::{Deserialize, Serialize};

use crate::acf::AcfReport;
use crate::dgp::{Deltas, DgpConfig, Innovation};
use crate::error::Result;
use crate::index::IndexReport;
use crate::kernel::{smooth_probabilities, BandwidthPolicy, Kernel, KernelPlan};
use crate::montecarlo::{quantile_sorted, run_monte_carlo, McSettings};
use crate::series::ReturnSeries;

/// `P(y_t ≠ 0)` of the correlated innovations, used to calibrate the null
/// reference to the observed trading frequency.
const REFERENCE_NONZERO_RATE: f64 = 0.72;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub m: usize,
    pub kernel: Kernel,
    pub bandwidth: BandwidthPolicy,
    pub level: f64,
    pub demean: bool,
    /// Simulated stationary trajectories for the κ̂ reference; 0 disables it.
    pub reference_trials: usize,
    pub reference_seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            m: 1,
            kernel: Kernel::Epanechnikov,
            bandwidth: BandwidthPolicy::default(),
            level: 0.95,
            demean: false,
            reference_trials: 200,
            reference_seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInfo {
    pub n: usize,
    pub zero_fraction: f64,
    pub zero_tolerance: f64,
    pub demeaned: bool,
}

/// Null band of one lag: the corrected estimate is significant when it lies
/// outside `± halfwidth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagBand {
    pub lag: usize,
    pub rho_pr: f64,
    pub halfwidth_pr: f64,
    pub outside_pr: bool,
    pub rho_vpr: f64,
    pub halfwidth_vpr: f64,
    pub outside_vpr: bool,
}

/// κ̂ quantiles over simulated trajectories with constant variance and
/// constant trading probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullReference {
    pub trials: usize,
    pub failures: usize,
    pub seed: u64,
    pub trade_probability: f64,
    pub median: f64,
    pub p90: f64,
    pub p95: f64,
    pub p99: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    Pr,
    Vpr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Advisory {
    pub suggested: Option<Correction>,
    pub reference: Option<NullReference>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub series: SeriesInfo,
    pub m: usize,
    pub acf: AcfReport,
    pub index: IndexReport,
    pub kernel_plan: Option<KernelPlan>,
    pub sigma_upsilon: Vec<Vec<f64>>,
    pub bands: Vec<LagBand>,
    pub advisory: Advisory,
    pub warnings: Vec<String>,
}

/// Largest usable lag: a quarter of the sample, at least one when `n ≥ 2`.
pub fn max_lag_for(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        (n / 4).max(1)
    }
}

pub fn analyze(series: &ReturnSeries, options: &AnalysisOptions) -> Result<AnalysisReport> {
    let series = if options.demean {
        series.demeaned()
    } else {
        series.clone()
    };
    let n = series.len();
    let mut warnings = Vec::new();

    let m_max = max_lag_for(n);
    let m = if options.m > m_max {
        warnings.push(format!(
            "requested {} lags but a series of length {n} supports {m_max}; using {m_max}",
            options.m
        ));
        m_max
    } else {
        options.m
    };
    if m == 0 {
        if n < 2 {
            warnings.push("series too short for any lag; only lag-0 statistics reported".into());
        }
        let acf = AcfReport::lag_zero(&series, options.level)?;
        return Ok(AnalysisReport {
            series: info(&series, options.demean),
            m,
            acf,
            index: IndexReport::from_deltas(vec![]),
            kernel_plan: None,
            sigma_upsilon: vec![],
            bands: vec![],
            advisory: Advisory {
                suggested: None,
                reference: None,
                text: "no lags available; no correction to choose".into(),
            },
            warnings,
        });
    }

    let a = series.amplitude();
    let plan = options.bandwidth.plan(&a, m, options.kernel)?;
    let probs = smooth_probabilities(&a, m, &plan)?;
    let comp = AcfReport::compute(&series, m, &probs, options.level)?;
    let acf = comp.report;

    let bands = (0..m)
        .map(|i| LagBand {
            lag: i + 1,
            rho_pr: acf.rho_pr[i],
            halfwidth_pr: acf.ci_halfwidth_pr[i],
            outside_pr: acf.rho_pr[i].abs() > acf.ci_halfwidth_pr[i],
            rho_vpr: acf.rho_vpr[i],
            halfwidth_vpr: acf.ci_halfwidth_vpr[i],
            outside_vpr: acf.rho_vpr[i].abs() > acf.ci_halfwidth_vpr[i],
        })
        .collect();

    let reference = if options.reference_trials > 0 {
        match null_reference(&series, m, options) {
            Ok(r) => Some(r),
            Err(e) => {
                warnings.push(format!("null reference unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };
    let advisory = advise(acf.kappa, m, reference);

    Ok(AnalysisReport {
        series: info(&series, options.demean),
        m,
        index: comp.index,
        kernel_plan: Some(plan),
        sigma_upsilon: comp.covariance.sigma_upsilon,
        bands,
        advisory,
        warnings,
        acf,
    })
}

fn info(series: &ReturnSeries, demeaned: bool) -> SeriesInfo {
    SeriesInfo {
        n: series.len(),
        zero_fraction: series.empirical_zero_fraction(),
        zero_tolerance: series.zero_tolerance(),
        demeaned,
    }
}

/// κ̂ distribution over stationary trajectories of the same length whose
/// trading frequency matches the data, with bandwidths chosen by the same
/// policy as on the data.
fn null_reference(
    series: &ReturnSeries,
    m: usize,
    options: &AnalysisOptions,
) -> Result<NullReference> {
    let traded = 1.0 - series.empirical_zero_fraction();
    let g = (traded / REFERENCE_NONZERO_RATE).clamp(0.05, 1.0);
    let deltas = Deltas {
        delta1: 1.0,
        delta2: 1.0,
        delta3: g,
        delta4: g,
    };
    let dgp = DgpConfig::custom(
        deltas,
        series.len(),
        Innovation::CorrelatedAr,
        options.reference_seed,
    )?;
    let settings = McSettings {
        trials: options.reference_trials,
        m,
        kernel: options.kernel,
        bandwidth: options.bandwidth.clone(),
        level: options.level,
    };
    let summary = run_monte_carlo(&dgp, &settings)?;
    let mut kappas: Vec<f64> = summary.outcomes.iter().map(|o| o.kappa).collect();
    kappas.sort_by(f64::total_cmp);
    Ok(NullReference {
        trials: summary.trials,
        failures: summary.failures,
        seed: options.reference_seed,
        trade_probability: g,
        median: quantile_sorted(&kappas, 0.5),
        p90: quantile_sorted(&kappas, 0.9),
        p95: quantile_sorted(&kappas, 0.95),
        p99: quantile_sorted(&kappas, 0.99),
    })
}

fn advise(kappa: f64, m: usize, reference: Option<NullReference>) -> Advisory {
    match reference {
        Some(r) if kappa > r.p95 => Advisory {
            suggested: Some(Correction::Vpr),
            text: format!(
                "kappa_{m} = {kappa:.4} exceeds the 95th percentile {:.4} of {} simulated stationary series; the vpr correction is advisable",
                r.p95, r.trials
            ),
            reference: Some(r),
        },
        Some(r) => Advisory {
            suggested: Some(Correction::Pr),
            text: format!(
                "kappa_{m} = {kappa:.4} is within the 95th percentile {:.4} of {} simulated stationary series; the pr correction looks adequate",
                r.p95, r.trials
            ),
            reference: Some(r),
        },
        None => Advisory {
            suggested: None,
            reference: None,
            text: format!("kappa_{m} = {kappa:.4}; values far from zero favour the vpr correction"),
        },
    }
}
