//! Simulated illiquid returns with a piecewise-linear variance profile and a
//! piecewise-linear probability of trading.
//!
//! ```text
//! r_t = σ̃(t/n) · a_{1t} · y_t,     a_{1t} ~ Bernoulli(g(t/n)) independent of y
//! σ̃(s) = δ1 on (0, 0.4],  linear ramp on (0.4, 0.6],  δ2 on (0.6, 1]
//! g(s)  = δ3 on (0, 0.4],  linear ramp on (0.4, 0.6],  δ4 on (0.6, 1]
//! ```
//!
//! The innovations `y_t` are built from the product process
//! `x_t = z_t z_{t−1} z_{t−2} z_{t−3}` with iid standard normal `z`, which is
//! serially uncorrelated but dependent.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`; trial `k`
//! of a Monte Carlo run uses ChaCha stream `k`, so any trial can be replayed
//! on its own and results do not depend on scheduling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::ReturnSeries;

/// Draws discarded before `t = 1` so that every kept `x_t` has four factors
/// and its first lags exist.
pub const BURN_IN: usize = 10;

/// Threshold below which `|x_t|` counts as no trade.
pub const INNOVATION_THRESHOLD: f64 = 0.01;

fn ramp(s: f64, left: f64, right: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(s));
    }
    Ok(if s <= 0.4 {
        left
    } else if s <= 0.6 {
        (right - left) / 0.2 * s + 3.0 * left - 2.0 * right
    } else {
        right
    })
}

/// `σ̃(s)`.
pub fn variance_profile(s: f64, delta1: f64, delta2: f64) -> Result<f64> {
    ramp(s, delta1, delta2)
}

/// `g(s)`, the probability that `a_{1t} = 1`.
pub fn probability_profile(s: f64, delta3: f64, delta4: f64) -> Result<f64> {
    ramp(s, delta3, delta4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// time-varying probability, heteroscedastic
    I,
    /// time-varying probability, homoscedastic
    II,
    /// constant probability, heteroscedastic
    III,
    /// constant probability, homoscedastic
    IV,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::I, Case::II, Case::III, Case::IV];

    pub fn deltas(self) -> Deltas {
        let (d1, d2, d3, d4) = match self {
            Case::I => (0.5, 2.0, 0.3, 0.9),
            Case::II => (1.0, 1.0, 0.3, 0.9),
            Case::III => (0.5, 2.0, 0.6, 0.6),
            Case::IV => (1.0, 1.0, 0.6, 0.6),
        };
        Deltas {
            delta1: d1,
            delta2: d2,
            delta3: d3,
            delta4: d4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Case::I => "i",
            Case::II => "ii",
            Case::III => "iii",
            Case::IV => "iv",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .trim_matches(|c| c == '(' || c == ')')
        {
            "i" | "1" => Ok(Case::I),
            "ii" | "2" => Ok(Case::II),
            "iii" | "3" => Ok(Case::III),
            "iv" | "4" => Ok(Case::IV),
            other => Err(Error::Config(format!("unknown case {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
}

impl Deltas {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let prob = |v: f64| v > 0.0 && v <= 1.0;
        if !(pos(self.delta1) && pos(self.delta2)) {
            return Err(Error::Config(format!(
                "variance levels must be positive, got ({}, {})",
                self.delta1, self.delta2
            )));
        }
        if !(prob(self.delta3) && prob(self.delta4)) {
            return Err(Error::Config(format!(
                "probability levels must lie in (0, 1], got ({}, {})",
                self.delta3, self.delta4
            )));
        }
        Ok(())
    }
}

/// Which innovation sequence `y_t` drives the returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    /// `y_t = 0.3 u_{t−1} + u_t` when both `u` are non-zero, else 0, with
    /// `u_t = x_t 1{|x_t| > 0.01, |x_{t−1}| > 0.01}`.
    #[default]
    CorrelatedAr,
    /// `y_t = x_t` when `x_t` clears the threshold, else 0.
    Uncorrelated,
}

impl fmt::Display for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Innovation::CorrelatedAr => "correlated_ar",
            Innovation::Uncorrelated => "uncorrelated",
        })
    }
}

impl FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "correlated_ar" | "correlated" | "ar" => Ok(Innovation::CorrelatedAr),
            "uncorrelated" | "product" => Ok(Innovation::Uncorrelated),
            other => Err(Error::Config(format!("unknown innovation {other:?}"))),
        }
    }
}

/// Threshold rule of the uncorrelated variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `|x_t| > 0.01`; gives `P(y_t ≠ 0) ≈ 0.83`.
    #[default]
    TwoSided,
    /// `x_t > 0.01`; gives `P(y_t ≠ 0) ≈ 0.42`.
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub n: usize,
    /// Preset the deltas came from, if any.
    pub case: Option<Case>,
    pub deltas: Deltas,
    pub innovation: Innovation,
    pub threshold: ThresholdRule,
    pub seed: u64,
}

impl DgpConfig {
    pub fn preset(case: Case, n: usize, innovation: Innovation, seed: u64) -> Self {
        Self {
            n,
            case: Some(case),
            deltas: case.deltas(),
            innovation,
            threshold: ThresholdRule::default(),
            seed,
        }
    }

    pub fn custom(deltas: Deltas, n: usize, innovation: Innovation, seed: u64) -> Result<Self> {
        let cfg = Self {
            n,
            case: None,
            deltas,
            innovation,
            threshold: ThresholdRule::default(),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("trajectory length must be positive".into()));
        }
        self.deltas.validate()
    }
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `length` draws of the innovation sequence `y_t`.
pub fn innovation_stream<R: Rng + ?Sized>(
    kind: Innovation,
    threshold: ThresholdRule,
    length: usize,
    rng: &mut R,
) -> Vec<f64> {
    let total = length + BURN_IN;
    let z: Vec<f64> = (0..total + 3).map(|_| rng.sample(StandardNormal)).collect();
    let x: Vec<f64> = (0..total)
        .map(|i| z[i] * z[i + 1] * z[i + 2] * z[i + 3])
        .collect();
    let keep = |i: usize| i >= BURN_IN;
    match kind {
        Innovation::Uncorrelated => x
            .iter()
            .enumerate()
            .filter(|&(i, _)| keep(i))
            .map(|(_, &v)| {
                let trade = match threshold {
                    ThresholdRule::TwoSided => v.abs() > INNOVATION_THRESHOLD,
                    ThresholdRule::OneSided => v > INNOVATION_THRESHOLD,
                };
                if trade {
                    v
                } else {
                    0.0
                }
            })
            .collect(),
        Innovation::CorrelatedAr => {
            let clear = |v: f64| v.abs() > INNOVATION_THRESHOLD;
            let u: Vec<f64> = (0..total)
                .map(|i| {
                    if i > 0 && clear(x[i]) && clear(x[i - 1]) {
                        x[i]
                    } else {
                        0.0
                    }
                })
                .collect();
            (BURN_IN..total)
                .map(|i| {
                    if u[i] != 0.0 && u[i - 1] != 0.0 {
                        0.3 * u[i - 1] + u[i]
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    }
}

/// One trajectory drawn from `rng`.
pub fn simulate_with<R: Rng + ?Sized>(config: &DgpConfig, rng: &mut R) -> Result<ReturnSeries> {
    config.validate()?;
    let n = config.n;
    let d = config.deltas;
    let y = innovation_stream(config.innovation, config.threshold, n, rng);
    let mut r = Vec::with_capacity(n);
    for (t, &yt) in y.iter().enumerate() {
        let s = (t + 1) as f64 / n as f64;
        let sigma = variance_profile(s, d.delta1, d.delta2)?;
        let g = probability_profile(s, d.delta3, d.delta4)?;
        let traded = rng.random::<f64>() < g;
        r.push(if traded { sigma * yt } else { 0.0 });
    }
    ReturnSeries::new(r)
}

/// One trajectory; identical seeds give bitwise identical output.
pub fn simulate(config: &DgpConfig) -> Result<ReturnSeries> {
    simulate_with(config, &mut trial_rng(config.seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn variance_profile_examples() {
        assert_eq!(variance_profile(0.2, 0.5, 2.0).unwrap(), 0.5);
        assert_abs_diff_eq!(
            variance_profile(0.5, 0.5, 2.0).unwrap(),
            1.25,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            variance_profile(0.6, 0.5, 2.0).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_eq!(variance_profile(0.7, 0.5, 2.0).unwrap(), 2.0);
        assert!(matches!(
            variance_profile(0.0, 0.5, 2.0),
            Err(Error::Domain(_))
        ));
        assert!(variance_profile(1.2, 0.5, 2.0).is_err());
    }

    #[test]
    fn probability_profile_examples() {
        assert_eq!(probability_profile(0.2, 0.3, 0.9).unwrap(), 0.3);
        assert_abs_diff_eq!(
            probability_profile(0.5, 0.3, 0.9).unwrap(),
            0.6,
            epsilon = 1e-12
        );
        for s in [0.01, 0.4, 0.45, 0.6, 0.99, 1.0] {
            assert_abs_diff_eq!(
                probability_profile(s, 0.6, 0.6).unwrap(),
                0.6,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn profiles_are_continuous() {
        for (l, r) in [(0.5, 2.0), (0.3, 0.9), (1.0, 1.0)] {
            for knot in [0.4, 0.6] {
                let a = ramp(knot, l, r).unwrap();
                let b = ramp(knot + 1e-9, l, r).unwrap();
                assert!((a - b).abs() < 1e-6, "jump at {knot}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn presets() {
        assert_eq!(
            Case::I.deltas(),
            Deltas {
                delta1: 0.5,
                delta2: 2.0,
                delta3: 0.3,
                delta4: 0.9
            }
        );
        assert_eq!(
            Case::IV.deltas(),
            Deltas {
                delta1: 1.0,
                delta2: 1.0,
                delta3: 0.6,
                delta4: 0.6
            }
        );
        assert_eq!("iii".parse::<Case>().unwrap(), Case::III);
        assert!("v".parse::<Case>().is_err());
        for c in Case::ALL {
            c.deltas().validate().unwrap();
        }
    }

    #[test]
    fn invalid_deltas() {
        let bad = Deltas {
            delta1: 0.0,
            delta2: 1.0,
            delta3: 0.5,
            delta4: 0.5,
        };
        assert!(DgpConfig::custom(bad, 100, Innovation::Uncorrelated, 1).is_err());
        let bad = Deltas {
            delta1: 1.0,
            delta2: 1.0,
            delta3: 1.5,
            delta4: 0.5,
        };
        assert!(DgpConfig::custom(bad, 100, Innovation::Uncorrelated, 1).is_err());
    }

    #[test]
    fn deterministic() {
        let cfg = DgpConfig::preset(Case::I, 300, Innovation::CorrelatedAr, 99);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        let other = simulate(&DgpConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn certain_trading_passes_innovations_through() {
        // with δ3 = δ4 = 1 every zero return comes from y itself
        let d = Deltas {
            delta1: 1.0,
            delta2: 1.0,
            delta3: 1.0,
            delta4: 1.0,
        };
        let cfg = DgpConfig::custom(d, 2000, Innovation::Uncorrelated, 5).unwrap();
        let mut rng = trial_rng(cfg.seed, 0);
        let y = innovation_stream(cfg.innovation, cfg.threshold, cfg.n, &mut rng);
        let r = simulate(&cfg).unwrap();
        for (rt, yt) in r.values().iter().zip(&y) {
            assert_eq!(*rt, *yt);
        }
    }

    #[test]
    fn zero_fraction_case_iv() {
        // P(a_t = 1) = P(a_1t = 1) P(y_t != 0) = 0.6 * 0.72
        let seeds = 20;
        let mean = (0..seeds)
            .map(|seed| {
                let cfg = DgpConfig::preset(Case::IV, 500, Innovation::CorrelatedAr, seed);
                simulate(&cfg).unwrap().empirical_zero_fraction()
            })
            .sum::<f64>()
            / seeds as f64;
        assert!((mean - 0.568).abs() < 0.03, "zero fraction {mean}");
    }
}
