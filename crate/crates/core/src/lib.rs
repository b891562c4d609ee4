//! Serial correlations of non-zero price changes for illiquid assets.
//!
//! Zero returns are modelled through the indicator `a_t = 1{r_t ≠ 0}`. The
//! classical sample autocorrelation `ρ̂₀(h)` is rescaled either by empirical
//! non-zero pair frequencies ("pr", valid when variance or trading
//! probability is constant) or by kernel-smoothed, time-varying
//! probabilities weighted by squared returns ("vpr", valid when both move).
//! The index `κ̂_m` helps decide which one to report.
//!
//! ```
//! use zeroacf::{acf, kernel::{smooth_probabilities, Kernel, KernelPlan}, ReturnSeries};
//!
//! let r = ReturnSeries::new(vec![0.01, 0.0, -0.02, 0.015, 0.0, 0.01, -0.005, 0.02]).unwrap();
//! let pr = acf::rho_pr(&r, 1).unwrap();
//! let plan = KernelPlan::fixed(Kernel::Epanechnikov, 0.5, 1).unwrap();
//! let probs = smooth_probabilities(&r.amplitude(), 1, &plan).unwrap();
//! let vpr = acf::rho_vpr(&r, 1, &probs).unwrap();
//! assert_eq!(pr.len(), vpr.len());
//! ```

pub mod acf;
pub mod analysis;
pub mod dgp;
pub mod error;
pub mod index;
pub mod inference;
pub mod kernel;
pub mod montecarlo;
pub mod series;

pub use acf::AcfReport;
pub use analysis::{analyze, AnalysisOptions, AnalysisReport};
pub use dgp::{Case, DgpConfig, Innovation};
pub use error::{Error, Result};
pub use index::IndexReport;
pub use kernel::{BandwidthPolicy, Kernel, KernelPlan, ProbabilityCurves};
pub use montecarlo::{run_monte_carlo, McSettings, McSummary};
pub use series::{PriceTable, ReturnSeries};
