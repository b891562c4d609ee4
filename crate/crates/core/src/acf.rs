//! Classical, probability-corrected ("pr") and variance-and-probability
//! corrected ("vpr") autocorrelations.
//!
//! ```text
//! γ̂₀(h)    = n⁻¹ Σ_{t>h} r_t r_{t−h}            ρ̂₀(h)   = γ̂₀(h) / γ̂₀(0)
//! γ̂_a(h)   = n⁻¹ Σ_{t>h} a_t a_{t−h}            ρ̂_pr(h)  = ρ̂₀(h) γ̂_a(0) / γ̂_a(h)
//! γ̂_ar²(h) = (n−h)⁻¹ Σ_{t>h} r_t² p̂_{t,t−h}/p̂_t  ρ̂_vpr(h) = ρ̂₀(h) γ̂₀(0) / γ̂_ar²(h)
//! ```
//!
//! The divisors differ on purpose: `n` for the two sample autocovariances,
//! `n − h` for the kernel-weighted second moment. Returns are not demeaned.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{kappa, IndexReport};
use crate::inference::{ci_halfwidth_pr, ci_halfwidth_vpr, upsilon_covariance, CovarianceEstimate};
use crate::kernel::ProbabilityCurves;
use crate::series::ReturnSeries;

fn check_lag(series: &ReturnSeries, h: usize) -> Result<()> {
    if h >= series.len() {
        Err(Error::InvalidLag {
            lag: h,
            n: series.len(),
        })
    } else {
        Ok(())
    }
}

/// `n⁻¹ Σ_{t=h+1..n} r_t r_{t−h}`.
pub fn gamma0(series: &ReturnSeries, h: usize) -> Result<f64> {
    check_lag(series, h)?;
    let r = series.values();
    let s: f64 = r[h..].iter().zip(r).map(|(x, y)| x * y).sum();
    Ok(s / r.len() as f64)
}

/// `n⁻¹ Σ_{t=h+1..n} a_t a_{t−h}`.
pub fn gamma_a(series: &ReturnSeries, h: usize) -> Result<f64> {
    check_lag(series, h)?;
    let n = series.len();
    let count = (h..n)
        .filter(|&t| series.is_nonzero(t) && series.is_nonzero(t - h))
        .count();
    Ok(count as f64 / n as f64)
}

/// `ρ̂₀(1..=m)`.
pub fn rho0(series: &ReturnSeries, m: usize) -> Result<Vec<f64>> {
    check_lag(series, m)?;
    let g0 = gamma0(series, 0)?;
    if g0 == 0.0 {
        return Err(Error::AllZeroSeries);
    }
    (1..=m).map(|h| Ok(gamma0(series, h)? / g0)).collect()
}

/// Per-lag factors `γ̂_a(0)/γ̂_a(h)`, `h = 1..=m`.
pub fn pr_scales(series: &ReturnSeries, m: usize) -> Result<Vec<f64>> {
    check_lag(series, m)?;
    let ga0 = gamma_a(series, 0)?;
    (1..=m)
        .map(|h| {
            let gah = gamma_a(series, h)?;
            if gah == 0.0 {
                Err(Error::DegenerateLag {
                    lag: h,
                    what: "non-zero pair frequency γ̂_a(h)",
                })
            } else {
                Ok(ga0 / gah)
            }
        })
        .collect()
}

/// `ρ̂_pr(1..=m)`.
pub fn rho_pr(series: &ReturnSeries, m: usize) -> Result<Vec<f64>> {
    let base = rho0(series, m)?;
    let scales = pr_scales(series, m)?;
    Ok(base.iter().zip(&scales).map(|(r, s)| r * s).collect())
}

/// `(n−h)⁻¹ Σ_{t=h+1..n} r_t² p̂_{t,t−h}/p̂_t`, dropping terms with `p̂_t = 0`.
pub fn gamma_ar2(series: &ReturnSeries, h: usize, probs: &ProbabilityCurves) -> Result<f64> {
    if h == 0 {
        return Err(Error::InvalidLag {
            lag: 0,
            n: series.len(),
        });
    }
    check_lag(series, h)?;
    let n = series.len();
    let pair = probs.pair(h).ok_or_else(|| {
        Error::Contract(format!("smoothed pair probabilities missing for lag {h}"))
    })?;
    if probs.p_t.len() != n || pair.len() != n {
        return Err(Error::Contract(format!(
            "smoothed curves have length {} but the series has {n}",
            probs.p_t.len()
        )));
    }
    let r = series.values();
    let s: f64 = (h..n)
        .map(|t| {
            let pt = probs.p_t[t];
            if pt == 0.0 {
                0.0
            } else {
                r[t] * r[t] * pair[t] / pt
            }
        })
        .sum();
    Ok(s / (n - h) as f64)
}

/// Per-lag factors `γ̂₀(0)/γ̂_ar²(h)`, `h = 1..=m`.
pub fn vpr_scales(series: &ReturnSeries, m: usize, probs: &ProbabilityCurves) -> Result<Vec<f64>> {
    check_lag(series, m)?;
    let g0 = gamma0(series, 0)?;
    (1..=m)
        .map(|h| {
            let g = gamma_ar2(series, h, probs)?;
            if g == 0.0 {
                Err(Error::DegenerateLag {
                    lag: h,
                    what: "weighted second moment γ̂_ar²(h)",
                })
            } else {
                Ok(g0 / g)
            }
        })
        .collect()
}

/// `ρ̂_vpr(1..=m)`.
pub fn rho_vpr(series: &ReturnSeries, m: usize, probs: &ProbabilityCurves) -> Result<Vec<f64>> {
    let base = rho0(series, m)?;
    let scales = vpr_scales(series, m, probs)?;
    Ok(base.iter().zip(&scales).map(|(r, s)| r * s).collect())
}

/// All autocorrelation estimates of one series up to lag `m`, with their
/// null confidence half-widths and the stationarity index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfReport {
    pub m: usize,
    pub level: f64,
    /// `γ̂₀(0..=m)`
    pub gamma0: Vec<f64>,
    /// `γ̂_a(0..=m)`
    pub gamma_a: Vec<f64>,
    /// `γ̂_ar²(1..=m)`
    pub gamma_ar2: Vec<f64>,
    pub rho0: Vec<f64>,
    pub rho_pr: Vec<f64>,
    pub rho_vpr: Vec<f64>,
    pub ci_halfwidth_pr: Vec<f64>,
    pub ci_halfwidth_vpr: Vec<f64>,
    pub kappa: f64,
}

/// [`AcfReport`] together with the intermediate objects it was built from.
#[derive(Debug, Clone)]
pub struct AcfComputation {
    pub report: AcfReport,
    pub covariance: CovarianceEstimate,
    pub index: IndexReport,
}

impl AcfReport {
    /// Computes every estimator for lags `1..=m` from one set of curves.
    pub fn compute(
        series: &ReturnSeries,
        m: usize,
        probs: &ProbabilityCurves,
        level: f64,
    ) -> Result<AcfComputation> {
        check_lag(series, m)?;
        let gamma0_v = (0..=m)
            .map(|h| gamma0(series, h))
            .collect::<Result<Vec<_>>>()?;
        let gamma_a_v = (0..=m)
            .map(|h| gamma_a(series, h))
            .collect::<Result<Vec<_>>>()?;
        let gamma_ar2_v = (1..=m)
            .map(|h| gamma_ar2(series, h, probs))
            .collect::<Result<Vec<_>>>()?;
        let rho0_v = rho0(series, m)?;
        let spr = pr_scales(series, m)?;
        let svpr = vpr_scales(series, m, probs)?;
        let rho_pr_v = rho0_v.iter().zip(&spr).map(|(r, s)| r * s).collect();
        let rho_vpr_v = rho0_v.iter().zip(&svpr).map(|(r, s)| r * s).collect();

        let covariance = upsilon_covariance(series, m)?.with_scales(spr, svpr);
        let n = series.len();
        let hw_pr = ci_halfwidth_pr(&covariance, n, level)?;
        let hw_vpr = ci_halfwidth_vpr(&covariance, gamma0_v[0], n, level)?;
        let index = kappa(series, m, probs)?;

        Ok(AcfComputation {
            report: AcfReport {
                m,
                level,
                gamma0: gamma0_v,
                gamma_a: gamma_a_v,
                gamma_ar2: gamma_ar2_v,
                rho0: rho0_v,
                rho_pr: rho_pr_v,
                rho_vpr: rho_vpr_v,
                ci_halfwidth_pr: hw_pr,
                ci_halfwidth_vpr: hw_vpr,
                kappa: index.kappa,
            },
            covariance,
            index,
        })
    }

    /// Lag-0 only report for series too short to carry any lag.
    pub fn lag_zero(series: &ReturnSeries, level: f64) -> Result<Self> {
        Ok(AcfReport {
            m: 0,
            level,
            gamma0: vec![gamma0(series, 0)?],
            gamma_a: vec![gamma_a(series, 0)?],
            gamma_ar2: vec![],
            rho0: vec![],
            rho_pr: vec![],
            rho_vpr: vec![],
            ci_halfwidth_pr: vec![],
            ci_halfwidth_vpr: vec![],
            kappa: 0.0,
        })
    }
}
