//! Index for choosing between the "pr" and "vpr" corrections.
//!
//! ```text
//! Δ̂_h = [n⁻¹ Σ r_t²] / [(n−h)⁻¹ Σ_{t>h} r_t² p̂_{t,t−h}/p̂_t]
//!     − [n⁻¹ Σ a_t]  / [(n−h)⁻¹ Σ_{t>h} a_t a_{t−h}]
//! κ̂_m = Σ_{h=1..m} Δ̂_h²
//! ```
//!
//! `κ̂_m` tends to zero when the probability correction alone is adequate
//! and stays away from zero when variance and zero-return probability move
//! together. No threshold is built in.

use serde::{Deserialize, Serialize};

use crate::acf::{gamma0, gamma_a, gamma_ar2};
use crate::error::{Error, IndexDenominator, Result};
use crate::kernel::ProbabilityCurves;
use crate::series::ReturnSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub m: usize,
    /// `Δ̂_1..Δ̂_m`
    pub delta_h: Vec<f64>,
    pub kappa: f64,
}

impl IndexReport {
    pub fn from_deltas(delta_h: Vec<f64>) -> Self {
        let kappa = delta_h.iter().fold(0.0, |acc, d| acc + d * d);
        Self {
            m: delta_h.len(),
            delta_h,
            kappa,
        }
    }
}

pub fn delta_h(series: &ReturnSeries, h: usize, probs: &ProbabilityCurves) -> Result<f64> {
    let n = series.len();
    let weighted = gamma_ar2(series, h, probs)?;
    if weighted == 0.0 {
        return Err(Error::DegenerateIndex {
            lag: h,
            which: IndexDenominator::WeightedSquares,
        });
    }
    let pairs = gamma_a(series, h)? * n as f64 / (n - h) as f64;
    if pairs == 0.0 {
        return Err(Error::DegenerateIndex {
            lag: h,
            which: IndexDenominator::PairFrequency,
        });
    }
    Ok(gamma0(series, 0)? / weighted - gamma_a(series, 0)? / pairs)
}

pub fn kappa(series: &ReturnSeries, m: usize, probs: &ProbabilityCurves) -> Result<IndexReport> {
    let deltas = (1..=m)
        .map(|h| delta_h(series, h, probs))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexReport::from_deltas(deltas))
}
