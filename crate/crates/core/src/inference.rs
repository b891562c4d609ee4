//! Heteroscedasticity-consistent null bands for the corrected
//! autocorrelations.
//!
//! With `Υ_t = (r_t r_{t−1}, …, r_t r_{t−m})′`,
//!
//! ```text
//! Σ̂_Υ  = n⁻¹ Σ_{t=m+1..n} Υ_t Υ_t′
//! σ̂_r² = n⁻¹ Σ_t r_t²            (the same statistic as γ̂₀(0))
//! ```
//!
//! and the marginal half-width at lag `h` is
//! `z · n^{−1/2} · scale(h) · sqrt(Σ̂_Υ(h,h)) / σ̂_r²`, where `scale` is the
//! per-lag correction factor of the estimator.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::acf::gamma0;
use crate::error::{Error, Result};
use crate::series::ReturnSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    /// `m × m`, row-major rows.
    pub sigma_upsilon: Vec<Vec<f64>>,
    pub sigma_r2: f64,
    /// `γ̂_a(0)/γ̂_a(h)`, `h = 1..=m`; empty until attached.
    pub scale_pr: Vec<f64>,
    /// `γ̂₀(0)/γ̂_ar²(h)`, `h = 1..=m`; empty until attached.
    pub scale_vpr: Vec<f64>,
}

impl CovarianceEstimate {
    pub fn m(&self) -> usize {
        self.sigma_upsilon.len()
    }

    pub fn with_scales(mut self, scale_pr: Vec<f64>, scale_vpr: Vec<f64>) -> Self {
        self.scale_pr = scale_pr;
        self.scale_vpr = scale_vpr;
        self
    }

    /// Diagonal of `Σ̂_Υ`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.m()).map(|i| self.sigma_upsilon[i][i]).collect()
    }
}

/// `Σ̂_Υ` and `σ̂_r²`; the scale vectors are left empty.
#[allow(clippy::needless_range_loop)]
pub fn upsilon_covariance(series: &ReturnSeries, m: usize) -> Result<CovarianceEstimate> {
    let n = series.len();
    if m >= n {
        return Err(Error::InvalidLag { lag: m, n });
    }
    let r = series.values();
    let mut sigma = vec![vec![0.0; m]; m];
    let mut ups = vec![0.0; m];
    for t in m..n {
        for (i, u) in ups.iter_mut().enumerate() {
            *u = r[t] * r[t - i - 1];
        }
        for i in 0..m {
            for j in 0..=i {
                sigma[i][j] += ups[i] * ups[j];
            }
        }
    }
    let nf = n as f64;
    for i in 0..m {
        for j in 0..=i {
            sigma[i][j] /= nf;
            sigma[j][i] = sigma[i][j];
        }
    }
    Ok(CovarianceEstimate {
        sigma_upsilon: sigma,
        sigma_r2: gamma0(series, 0)?,
        scale_pr: Vec::new(),
        scale_vpr: Vec::new(),
    })
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `z_{(1+level)/2}`.
pub fn two_sided_critical(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!(
            "coverage level must lie in (0, 1), got {level}"
        )));
    }
    Ok(normal_quantile((1.0 + level) / 2.0))
}

fn halfwidths(
    cov: &CovarianceEstimate,
    scales: &[f64],
    denom: f64,
    n: usize,
    level: f64,
) -> Result<Vec<f64>> {
    if scales.len() != cov.m() {
        return Err(Error::Contract(format!(
            "{} scale factors for {} lags",
            scales.len(),
            cov.m()
        )));
    }
    if let Some(h) = scales.iter().position(|s| !s.is_finite()) {
        return Err(Error::Contract(format!(
            "scale factor at lag {} is not finite",
            h + 1
        )));
    }
    let z = two_sided_critical(level)?;
    let root_n = (n as f64).sqrt();
    Ok(scales
        .iter()
        .zip(cov.diagonal())
        .map(|(s, d)| z / root_n * s * d.sqrt() / denom)
        .collect())
}

/// Null half-widths for `ρ̂_pr(1..=m)`.
pub fn ci_halfwidth_pr(cov: &CovarianceEstimate, n: usize, level: f64) -> Result<Vec<f64>> {
    if cov.sigma_r2 <= 0.0 {
        return Err(Error::Degenerate("σ̂_r² is zero".into()));
    }
    halfwidths(cov, &cov.scale_pr, cov.sigma_r2, n, level)
}

/// Null half-widths for `ρ̂_vpr(1..=m)`.
pub fn ci_halfwidth_vpr(
    cov: &CovarianceEstimate,
    gamma0_0: f64,
    n: usize,
    level: f64,
) -> Result<Vec<f64>> {
    if gamma0_0 <= 0.0 {
        return Err(Error::Degenerate("γ̂₀(0) is zero".into()));
    }
    halfwidths(cov, &cov.scale_vpr, gamma0_0, n, level)
}
