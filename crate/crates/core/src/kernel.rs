//! Leave-one-out Nadaraya–Watson smoothing of the zero-return indicator.
//!
//! For an observation index `t` and bandwidth `b` (in rescaled time) the
//! weights are
//!
//! ```text
//! K_tj = K((t − j) / (n b))   for j ≠ t,    K_tt = 0
//! w_tj = K_tj / Σ_i K_ti
//! ```
//!
//! and the smoothed probabilities are `p̂_t = Σ_j w_tj a_j` and
//! `p̂_{t,t−h} = Σ_{j>h} w_tj a_j a_{j−h}`. The normalisation runs over all
//! available neighbours, so no boundary correction is applied.
//!
//! Indices in this module are 0-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compactly supported kernel on `[-1, 1]`, each integrating to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Rectangular,
    #[default]
    Epanechnikov,
    Triangular,
}

impl Kernel {
    #[inline]
    pub fn eval(self, z: f64) -> f64 {
        let az = z.abs();
        if az > 1.0 {
            return 0.0;
        }
        match self {
            Kernel::Rectangular => 0.5,
            Kernel::Epanechnikov => 0.75 * (1.0 - z * z),
            Kernel::Triangular => 1.0 - az,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Kernel::Rectangular => "rect",
            Kernel::Epanechnikov => "epa",
            Kernel::Triangular => "tri",
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rect" | "rectangular" | "uniform" => Ok(Kernel::Rectangular),
            "epa" | "epanechnikov" => Ok(Kernel::Epanechnikov),
            "tri" | "triangular" => Ok(Kernel::Triangular),
            other => Err(Error::Config(format!("unknown kernel {other:?}"))),
        }
    }
}

/// Log-spaced bandwidth grid `lo:hi:k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub k: usize,
}

impl GridSpec {
    /// 20 points from a ten-observation window (`20/n`) up to half the sample.
    pub fn default_for(n: usize) -> Self {
        let hi = 0.5;
        let lo = (20.0 / n as f64).min(hi);
        Self { lo, hi, k: 20 }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.k <= 1 || self.lo == self.hi {
            return vec![self.hi];
        }
        let (ll, lh) = (self.lo.ln(), self.hi.ln());
        let step = (lh - ll) / (self.k - 1) as f64;
        let mut pts: Vec<f64> = (0..self.k).map(|i| (ll + step * i as f64).exp()).collect();
        // pin the end points against exp/ln round-off
        pts[0] = self.lo;
        pts[self.k - 1] = self.hi;
        pts
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("grid needs at least one point".into()));
        }
        validate_bandwidth(self.lo)?;
        validate_bandwidth(self.hi)?;
        if self.lo > self.hi {
            return Err(Error::Config(format!(
                "grid lower end {} exceeds upper end {}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.k)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "grid must look like lo:hi:k, got {s:?}"
            )));
        }
        let bad = |_| Error::Config(format!("cannot parse grid {s:?}"));
        let lo: f64 = parts[0].trim().parse().map_err(bad)?;
        let hi: f64 = parts[1].trim().parse().map_err(bad)?;
        let k: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse grid {s:?}")))?;
        let range = Self { lo, hi, k };
        range.validate()?;
        Ok(range)
    }
}

/// Target used when selecting the bandwidth of the marginal estimator `p̂_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalTarget {
    /// Predict `a_t`.
    #[default]
    Indicator,
    /// Predict `a_t a_{t−1}` with `p̂_t`.
    LagOnePair,
}

/// How the bandwidths of a plan were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Selection {
    Fixed,
    Loocv {
        grid: Vec<f64>,
        marginal_target: MarginalTarget,
    },
}

/// How a plan's bandwidths are to be chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BandwidthPolicy {
    Fixed {
        bandwidth: f64,
    },
    /// `grid = None` uses [`GridSpec::default_for`] the series length.
    Loocv {
        grid: Option<GridSpec>,
        marginal_target: MarginalTarget,
    },
}

impl Default for BandwidthPolicy {
    fn default() -> Self {
        BandwidthPolicy::Loocv {
            grid: None,
            marginal_target: MarginalTarget::Indicator,
        }
    }
}

impl BandwidthPolicy {
    /// Resolves the policy into concrete bandwidths for indicator `a`.
    pub fn plan(&self, a: &[f64], m: usize, kernel: Kernel) -> Result<KernelPlan> {
        match self {
            BandwidthPolicy::Fixed { bandwidth } => KernelPlan::fixed(kernel, *bandwidth, m),
            BandwidthPolicy::Loocv {
                grid,
                marginal_target,
            } => {
                let range = grid.unwrap_or_else(|| GridSpec::default_for(a.len()));
                range.validate()?;
                KernelPlan::loocv(a, m, kernel, &range.points(), *marginal_target)
            }
        }
    }
}

/// Kernel shape and bandwidths: `b0` for `p̂_t`, `bh[h−1]` for `p̂_{t,t−h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPlan {
    pub kernel: Kernel,
    pub b0: f64,
    pub bh: Vec<f64>,
    pub selection: Selection,
}

impl KernelPlan {
    /// Uses the same bandwidth for `p̂_t` and every `p̂_{t,t−h}`, `h ≤ m`.
    pub fn fixed(kernel: Kernel, bandwidth: f64, m: usize) -> Result<Self> {
        validate_bandwidth(bandwidth)?;
        Ok(Self {
            kernel,
            b0: bandwidth,
            bh: vec![bandwidth; m],
            selection: Selection::Fixed,
        })
    }

    /// Selects `b0` and each `b_h` independently by leave-one-out CV.
    pub fn loocv(
        a: &[f64],
        m: usize,
        kernel: Kernel,
        grid: &[f64],
        marginal_target: MarginalTarget,
    ) -> Result<Self> {
        let b0 = match marginal_target {
            MarginalTarget::Indicator => select_bandwidth_loocv(a, 0, grid, kernel)?,
            MarginalTarget::LagOnePair => select_marginal_pair(a, 1, grid, kernel)?,
        };
        let bh = (1..=m)
            .map(|h| select_bandwidth_loocv(a, h, grid, kernel))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kernel,
            b0,
            bh,
            selection: Selection::Loocv {
                grid: grid.to_vec(),
                marginal_target,
            },
        })
    }

    pub fn max_lag(&self) -> usize {
        self.bh.len()
    }

    pub fn validate(&self) -> Result<()> {
        validate_bandwidth(self.b0)?;
        self.bh.iter().try_for_each(|&b| validate_bandwidth(b))
    }
}

fn validate_bandwidth(b: f64) -> Result<()> {
    if b > 0.0 && b <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "bandwidth must lie in (0, 1], got {b}"
        )))
    }
}

/// Smoothed `p̂_t` and `p̂_{t,t−h}` for `h = 1..=m`.
///
/// `p_th[h − 1][t]` is stored for every `t`; entries with `t < h` are
/// well defined but unused by the estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityCurves {
    pub p_t: Vec<f64>,
    pub p_th: Vec<Vec<f64>>,
    pub plan: KernelPlan,
}

impl ProbabilityCurves {
    pub fn len(&self) -> usize {
        self.p_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_t.is_empty()
    }

    pub fn max_lag(&self) -> usize {
        self.p_th.len()
    }

    /// `p̂_{t,t−h}` curve for lag `h ≥ 1`.
    pub fn pair(&self, h: usize) -> Option<&[f64]> {
        if h == 0 {
            return None;
        }
        self.p_th.get(h - 1).map(Vec::as_slice)
    }
}

/// Leave-one-out weights `w_t·` of observation `t` (0-based).
pub fn loo_weights(t: usize, n: usize, b: f64, kernel: Kernel) -> Result<Vec<f64>> {
    if t >= n {
        return Err(Error::Contract(format!(
            "index {t} outside a series of length {n}"
        )));
    }
    validate_bandwidth(b)?;
    let nb = n as f64 * b;
    let mut w: Vec<f64> = (0..n)
        .map(|j| {
            if j == t {
                0.0
            } else {
                kernel.eval((t as f64 - j as f64) / nb)
            }
        })
        .collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::EmptyWindow { t, bandwidth: b });
    }
    w.iter_mut().for_each(|v| *v /= total);
    Ok(w)
}

/// Kernel values `K(d / (n b))` for offsets `d = 0..=D`, with `K[0] = 0`.
fn offset_kernel(n: usize, b: f64, kernel: Kernel) -> Vec<f64> {
    let nb = n as f64 * b;
    let reach = ((nb.floor() as usize) + 1).min(n.saturating_sub(1));
    let mut k = Vec::with_capacity(reach + 1);
    k.push(0.0);
    k.extend((1..=reach).map(|d| kernel.eval(d as f64 / nb)));
    k
}

/// `Σ_j w_tj x_j` for every `t`.
pub fn smooth(x: &[f64], b: f64, kernel: Kernel) -> Result<Vec<f64>> {
    validate_bandwidth(b)?;
    if x.iter().all(|&v| v == 0.0 || v == 1.0) {
        smooth_binary(x, b, kernel)
    } else {
        smooth_direct(x, b, kernel)
    }
}

fn smooth_direct(x: &[f64], b: f64, kernel: Kernel) -> Result<Vec<f64>> {
    let n = x.len();
    let k = offset_kernel(n, b, kernel);
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let mut num = 0.0;
        let mut den = 0.0;
        for (d, &kd) in k.iter().enumerate().skip(1) {
            if d <= t {
                num += kd * x[t - d];
                den += kd;
            }
            if t + d < n {
                num += kd * x[t + d];
                den += kd;
            }
        }
        if den <= 0.0 {
            return Err(Error::EmptyWindow { t, bandwidth: b });
        }
        out.push(num / den);
    }
    Ok(out)
}

/// Prefix sums of `x_j`, `j x_j` and `j² x_j`; exact for 0/1 data.
struct Moments {
    p0: Vec<i128>,
    p1: Vec<i128>,
    p2: Vec<i128>,
}

impl Moments {
    fn new(x: impl Iterator<Item = bool>) -> Self {
        let (mut p0, mut p1, mut p2) = (vec![0i128], vec![0i128], vec![0i128]);
        for (j, on) in x.enumerate() {
            let v = on as i128;
            let j = j as i128;
            p0.push(p0[p0.len() - 1] + v);
            p1.push(p1[p1.len() - 1] + v * j);
            p2.push(p2[p2.len() - 1] + v * j * j);
        }
        Self { p0, p1, p2 }
    }

    /// `(Σ x_j, Σ |t−j| x_j, Σ (t−j)² x_j)` over `j ∈ [lo, hi)`, all on one
    /// side of `t`.
    fn around(&self, t: usize, lo: usize, hi: usize) -> (i128, i128, i128) {
        let t = t as i128;
        let s0 = self.p0[hi] - self.p0[lo];
        let s1 = self.p1[hi] - self.p1[lo];
        let s2 = self.p2[hi] - self.p2[lo];
        let abs1 = (t * s0 - s1).abs();
        (s0, abs1, t * t * s0 - 2 * t * s1 + s2)
    }
}

/// Largest offset `d ≤ n − 1` with `d/(nb)` inside the kernel support.
fn support_reach(n: usize, nb: f64) -> usize {
    let mut d = (nb.floor() as usize + 1).min(n.saturating_sub(1));
    while d > 0 && d as f64 / nb > 1.0 {
        d -= 1;
    }
    d
}

/// Same estimator as [`smooth_direct`] for 0/1 data in O(n): every kernel is
/// a polynomial in `|t − j|` on its support, so window sums reduce to exact
/// integer moments.
fn smooth_binary(x: &[f64], b: f64, kernel: Kernel) -> Result<Vec<f64>> {
    let n = x.len();
    let nb = n as f64 * b;
    let reach = support_reach(n, nb);
    let data = Moments::new(x.iter().map(|&v| v == 1.0));
    let ones = Moments::new(std::iter::repeat_n(true, n));
    let weight = |(s0, s1, s2): (i128, i128, i128)| -> f64 {
        let (s0, s1, s2) = (s0 as f64, s1 as f64, s2 as f64);
        match kernel {
            Kernel::Rectangular => 0.5 * s0,
            Kernel::Epanechnikov => 0.75 * (s0 - s2 / (nb * nb)),
            Kernel::Triangular => s0 - s1 / nb,
        }
    };
    let add = |a: (i128, i128, i128), b: (i128, i128, i128)| (a.0 + b.0, a.1 + b.1, a.2 + b.2);
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let left = t.saturating_sub(reach);
        let right = (t + reach + 1).min(n);
        let num = weight(add(data.around(t, left, t), data.around(t, t + 1, right)));
        let den = weight(add(ones.around(t, left, t), ones.around(t, t + 1, right)));
        if den <= 0.0 {
            return Err(Error::EmptyWindow { t, bandwidth: b });
        }
        out.push((num / den).clamp(0.0, 1.0));
    }
    Ok(out)
}

/// `a_j a_{j−h}` for `j ≥ h`, zero before.
pub fn pair_indicator(a: &[f64], h: usize) -> Vec<f64> {
    (0..a.len())
        .map(|j| if j >= h { a[j] * a[j - h] } else { 0.0 })
        .collect()
}

/// Smooths `a` and its lagged products for `h = 1..=m` with `plan`.
pub fn smooth_probabilities(a: &[f64], m: usize, plan: &KernelPlan) -> Result<ProbabilityCurves> {
    if plan.bh.len() < m {
        return Err(Error::Contract(format!(
            "plan carries {} pair bandwidths, {m} needed",
            plan.bh.len()
        )));
    }
    if m >= a.len() {
        return Err(Error::InvalidLag { lag: m, n: a.len() });
    }
    let p_t = smooth(a, plan.b0, plan.kernel)?;
    let p_th = (1..=m)
        .map(|h| smooth(&pair_indicator(a, h), plan.bh[h - 1], plan.kernel))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityCurves {
        p_t,
        p_th,
        plan: KernelPlan {
            bh: plan.bh[..m].to_vec(),
            ..plan.clone()
        },
    })
}

/// One point of a cross-validation curve; `cv` is `None` on an empty window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub bandwidth: f64,
    pub cv: Option<f64>,
}

fn criterion(src: &[f64], target: &[f64], start: usize, b: f64, kernel: Kernel) -> Option<f64> {
    let fit = smooth(src, b, kernel).ok()?;
    Some(
        fit.iter()
            .zip(target)
            .skip(start)
            .map(|(p, y)| (p - y) * (p - y))
            .sum(),
    )
}

/// Leave-one-out CV curve. `h = 0` scores `p̂_t` against `a_t`; `h ≥ 1`
/// scores `p̂_{t,t−h}` against `a_t a_{t−h}` over `t ≥ h`.
pub fn cv_curve(a: &[f64], h: usize, grid: &[f64], kernel: Kernel) -> Result<Vec<CvPoint>> {
    if h >= a.len() {
        return Err(Error::InvalidLag { lag: h, n: a.len() });
    }
    let src = if h == 0 {
        a.to_vec()
    } else {
        pair_indicator(a, h)
    };
    grid.iter()
        .map(|&b| {
            validate_bandwidth(b)?;
            Ok(CvPoint {
                bandwidth: b,
                cv: criterion(&src, &src, h, b, kernel),
            })
        })
        .collect()
}

/// CV curve for `p̂_t` scored against `a_t a_{t−h}`.
pub fn cv_curve_marginal_pair(
    a: &[f64],
    h: usize,
    grid: &[f64],
    kernel: Kernel,
) -> Result<Vec<CvPoint>> {
    if h == 0 || h >= a.len() {
        return Err(Error::InvalidLag { lag: h, n: a.len() });
    }
    let target = pair_indicator(a, h);
    grid.iter()
        .map(|&b| {
            validate_bandwidth(b)?;
            Ok(CvPoint {
                bandwidth: b,
                cv: criterion(a, &target, h, b, kernel),
            })
        })
        .collect()
}

/// Index of the selected grid point: smallest CV, ties going to the largest
/// bandwidth.
pub fn argmin_cv(curve: &[CvPoint]) -> Result<usize> {
    let min = curve
        .iter()
        .filter_map(|p| p.cv)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return Err(Error::Selection(
            "every grid bandwidth yields an empty window".into(),
        ));
    }
    let tol = 1e-12 * min.abs().max(1.0);
    curve
        .iter()
        .enumerate()
        .filter(|(_, p)| p.cv.is_some_and(|cv| cv <= min + tol))
        .max_by(|(_, x), (_, y)| x.bandwidth.total_cmp(&y.bandwidth))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Selection("empty grid".into()))
}

/// Bandwidth minimising the leave-one-out criterion at lag `h`.
pub fn select_bandwidth_loocv(a: &[f64], h: usize, grid: &[f64], kernel: Kernel) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Selection("empty grid".into()));
    }
    let curve = cv_curve(a, h, grid, kernel)?;
    Ok(curve[argmin_cv(&curve)?].bandwidth)
}

fn select_marginal_pair(a: &[f64], h: usize, grid: &[f64], kernel: Kernel) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Selection("empty grid".into()));
    }
    let curve = cv_curve_marginal_pair(a, h, grid, kernel)?;
    Ok(curve[argmin_cv(&curve)?].bandwidth)
}
