//! Monte Carlo experiments over simulated trajectories.
//!
//! Each trial simulates one trajectory, estimates the lag-1 autocorrelations
//! and `κ̂_1`, and records whether the corrected estimates fall outside
//! their null bands. Trials run in parallel; per-trial results are stored by
//! index and reduced in index order, so a summary is identical for every
//! thread count.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acf::AcfReport;
use crate::dgp::{simulate_with, trial_rng, Case, Deltas, DgpConfig, Innovation, ThresholdRule};
use crate::error::{Error, Result};
use crate::kernel::{smooth_probabilities, BandwidthPolicy, GridSpec, Kernel, MarginalTarget};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub trials: usize,
    pub m: usize,
    pub kernel: Kernel,
    pub bandwidth: BandwidthPolicy,
    pub level: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            trials: 3000,
            m: 1,
            kernel: Kernel::Epanechnikov,
            bandwidth: BandwidthPolicy::default(),
            level: 0.95,
        }
    }
}

/// Lag-1 results of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub rho0: f64,
    pub pr: f64,
    pub vpr: f64,
    pub kappa: f64,
    pub exceed_pr: bool,
    pub exceed_vpr: bool,
    pub b0: f64,
    pub b1: f64,
}

pub fn run_trial(config: &DgpConfig, trial: u64, settings: &McSettings) -> Result<TrialOutcome> {
    let mut rng = trial_rng(config.seed, trial);
    let series = simulate_with(config, &mut rng)?;
    let m = settings.m.max(1);
    let a = series.amplitude();
    let plan = settings.bandwidth.plan(&a, m, settings.kernel)?;
    let probs = smooth_probabilities(&a, m, &plan)?;
    let rep = AcfReport::compute(&series, m, &probs, settings.level)?.report;
    Ok(TrialOutcome {
        rho0: rep.rho0[0],
        pr: rep.rho_pr[0],
        vpr: rep.rho_vpr[0],
        kappa: rep.kappa,
        exceed_pr: rep.rho_pr[0].abs() > rep.ci_halfwidth_pr[0],
        exceed_vpr: rep.rho_vpr[0].abs() > rep.ci_halfwidth_vpr[0],
        b0: plan.b0,
        b1: plan.bh[0],
    })
}

/// Min, quartiles and max; quartiles interpolate linearly between order
/// statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl FiveNumber {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Linear-interpolation quantile of sorted data, `p ∈ [0, 1]`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn five_number(values: &[f64]) -> FiveNumber {
    let s = sorted(values);
    FiveNumber {
        min: s[0],
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
        max: s[s.len() - 1],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean: f64,
    pub sd: f64,
    pub quantiles: FiveNumber,
    /// Fraction of trials outside the null band; `None` when the method has
    /// no band.
    pub exceedance: Option<f64>,
}

impl MethodSummary {
    fn from_values(method: &str, values: &[f64], exceedance: Option<f64>) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            method: method.to_string(),
            mean,
            sd: var.sqrt(),
            quantiles: five_number(values),
            exceedance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub case: Option<Case>,
    pub deltas: Deltas,
    pub innovation: Innovation,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub level: f64,
    pub failures: usize,
    /// Failed trial count per error category.
    pub failure_kinds: BTreeMap<String, usize>,
    /// `rho0`, `pr`, `vpr`.
    pub methods: Vec<MethodSummary>,
    pub kappa: MethodSummary,
    pub kappa_p95: f64,
    /// Whether the pr and vpr exceedance flags agree on every trial.
    pub exceedance_identical: bool,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

impl McSummary {
    pub fn method(&self, name: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == name)
    }
}

pub fn run_monte_carlo(config: &DgpConfig, settings: &McSettings) -> Result<McSummary> {
    config.validate()?;
    if settings.trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    let results: Vec<Result<TrialOutcome>> = (0..settings.trials as u64)
        .into_par_iter()
        .map(|k| run_trial(config, k, settings))
        .collect();

    let mut outcomes = Vec::with_capacity(results.len());
    let mut failure_kinds = BTreeMap::new();
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => *failure_kinds.entry(e.kind().to_string()).or_insert(0) += 1,
        }
    }
    if outcomes.is_empty() {
        return Err(Error::Degenerate(format!(
            "all {} trials failed ({failure_kinds:?})",
            settings.trials
        )));
    }
    let failures = settings.trials - outcomes.len();
    let ok = outcomes.len() as f64;
    let col = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).collect::<Vec<_>>();
    let exc_pr = outcomes.iter().filter(|o| o.exceed_pr).count() as f64 / ok;
    let exc_vpr = outcomes.iter().filter(|o| o.exceed_vpr).count() as f64 / ok;
    let kappas = col(|o| o.kappa);

    Ok(McSummary {
        case: config.case,
        deltas: config.deltas,
        innovation: config.innovation,
        n: config.n,
        trials: settings.trials,
        seed: config.seed,
        level: settings.level,
        failures,
        failure_kinds,
        methods: vec![
            MethodSummary::from_values("rho0", &col(|o| o.rho0), None),
            MethodSummary::from_values("pr", &col(|o| o.pr), Some(exc_pr)),
            MethodSummary::from_values("vpr", &col(|o| o.vpr), Some(exc_vpr)),
        ],
        kappa: MethodSummary::from_values("kappa", &kappas, None),
        kappa_p95: quantile_sorted(&sorted(&kappas), 0.95),
        exceedance_identical: outcomes.iter().all(|o| o.exceed_pr == o.exceed_vpr),
        outcomes,
    })
}

/// A Monte Carlo experiment over one DGP and one or more trajectory lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub case: Option<Case>,
    pub deltas: Deltas,
    pub innovation: Innovation,
    pub threshold: ThresholdRule,
    pub ns: Vec<usize>,
    pub seed: u64,
    pub settings: McSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            case: Some(Case::IV),
            deltas: Case::IV.deltas(),
            innovation: Innovation::Uncorrelated,
            threshold: ThresholdRule::TwoSided,
            ns: vec![500, 1500],
            seed: 1,
            settings: McSettings::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses whitespace- or newline-separated `key=value` pairs; `#` starts a
    /// comment. Later keys override earlier ones.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut explicit_deltas = [None; 4];
        let mut grid: Option<GridSpec> = None;
        let mut fixed: Option<f64> = None;
        let mut target = MarginalTarget::Indicator;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            for token in line.split_whitespace() {
                let (key, value) = token
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("expected key=value, got {token:?}")))?;
                cfg.apply(
                    key,
                    value,
                    &mut explicit_deltas,
                    &mut grid,
                    &mut fixed,
                    &mut target,
                )?;
            }
        }
        cfg.finish(explicit_deltas, grid, fixed, target)?;
        Ok(cfg)
    }

    fn apply(
        &mut self,
        key: &str,
        value: &str,
        deltas: &mut [Option<f64>; 4],
        grid: &mut Option<GridSpec>,
        fixed: &mut Option<f64>,
        target: &mut MarginalTarget,
    ) -> Result<()> {
        let num = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
        };
        let int = |v: &str| -> Result<u64> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
        };
        let key = key.trim();
        if key == "N" {
            self.settings.trials = int(value)? as usize;
            return Ok(());
        }
        match key.to_ascii_lowercase().as_str() {
            "case" => {
                let c: Case = value.parse()?;
                self.case = Some(c);
                self.deltas = c.deltas();
            }
            "n" => {
                self.ns = value
                    .split(',')
                    .map(|v| int(v.trim()).map(|x| x as usize))
                    .collect::<Result<Vec<_>>>()?;
            }
            "trials" => self.settings.trials = int(value)? as usize,
            "seed" => self.seed = int(value)?,
            "level" => self.settings.level = num(value)?,
            "lags" | "m" => self.settings.m = int(value)? as usize,
            "kernel" => self.settings.kernel = value.parse()?,
            "grid" => *grid = Some(value.parse()?),
            "bandwidth" => {
                *fixed = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(num(value)?)
                }
            }
            "cv_target" => {
                *target = match value {
                    "indicator" => MarginalTarget::Indicator,
                    "pair" => MarginalTarget::LagOnePair,
                    other => return Err(Error::Config(format!("unknown cv_target {other:?}"))),
                }
            }
            "innovation" => self.innovation = value.parse()?,
            "threshold" => {
                self.threshold = match value {
                    "two_sided" | "abs" => ThresholdRule::TwoSided,
                    "one_sided" => ThresholdRule::OneSided,
                    other => return Err(Error::Config(format!("unknown threshold {other:?}"))),
                }
            }
            "delta1" => deltas[0] = Some(num(value)?),
            "delta2" => deltas[1] = Some(num(value)?),
            "delta3" => deltas[2] = Some(num(value)?),
            "delta4" => deltas[3] = Some(num(value)?),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    fn finish(
        &mut self,
        deltas: [Option<f64>; 4],
        grid: Option<GridSpec>,
        fixed: Option<f64>,
        target: MarginalTarget,
    ) -> Result<()> {
        if deltas.iter().any(Option::is_some) {
            let d = &mut self.deltas;
            for (slot, v) in [&mut d.delta1, &mut d.delta2, &mut d.delta3, &mut d.delta4]
                .into_iter()
                .zip(deltas)
            {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            if self.case.is_some_and(|c| c.deltas() != self.deltas) {
                self.case = None;
            }
        }
        self.settings.bandwidth = match fixed {
            Some(bandwidth) => BandwidthPolicy::Fixed { bandwidth },
            None => BandwidthPolicy::Loocv {
                grid,
                marginal_target: target,
            },
        };
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.deltas.validate()?;
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 3) {
            return Err(Error::Config(
                "every trajectory length must be at least 3".into(),
            ));
        }
        if self.settings.trials == 0 {
            return Err(Error::Config("at least one trial is required".into()));
        }
        if !(self.settings.level > 0.0 && self.settings.level < 1.0) {
            return Err(Error::Config(format!(
                "level must lie in (0, 1), got {}",
                self.settings.level
            )));
        }
        if let BandwidthPolicy::Fixed { bandwidth } = self.settings.bandwidth {
            if !(bandwidth > 0.0 && bandwidth <= 1.0) {
                return Err(Error::Config(format!(
                    "bandwidth must lie in (0, 1], got {bandwidth}"
                )));
            }
        }
        Ok(())
    }

    pub fn dgp(&self, n: usize) -> DgpConfig {
        DgpConfig {
            n,
            case: self.case,
            deltas: self.deltas,
            innovation: self.innovation,
            threshold: self.threshold,
            seed: self.seed,
        }
    }

    pub fn run(&self) -> Result<Vec<McSummary>> {
        self.validate()?;
        self.ns
            .iter()
            .map(|&n| run_monte_carlo(&self.dgp(n), &self.settings))
            .collect()
    }
}

pub const SUMMARY_CSV_HEADER: [&str; 16] = [
    "case",
    "n",
    "innovation",
    "trials",
    "failures",
    "method",
    "mean",
    "sd",
    "min",
    "q1",
    "median",
    "q3",
    "max",
    "exceedance",
    "exceedance_pct",
    "level",
];

/// One row per method and trajectory length, `kappa` included as a method.
pub fn write_summary_csv<W: Write>(summaries: &[McSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_CSV_HEADER)?;
    for s in summaries {
        let case = s
            .case
            .map(|c| c.label().to_string())
            .unwrap_or_else(|| "custom".into());
        for m in s.methods.iter().chain(std::iter::once(&s.kappa)) {
            let q = m.quantiles;
            let (exc, pct) = match m.exceedance {
                Some(e) => (e.to_string(), format!("{:.1}", 100.0 * e)),
                None => (String::new(), String::new()),
            };
            w.write_record([
                case.clone(),
                s.n.to_string(),
                s.innovation.to_string(),
                s.trials.to_string(),
                s.failures.to_string(),
                m.method.clone(),
                m.mean.to_string(),
                m.sd.to_string(),
                q.min.to_string(),
                q.q1.to_string(),
                q.median.to_string(),
                q.q3.to_string(),
                q.max.to_string(),
                exc,
                pct,
                s.level.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
