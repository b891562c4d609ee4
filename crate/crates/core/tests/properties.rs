use nalgebra::DMatrix;
use proptest::prelude::*;

use zeroacf::acf::{gamma_a, rho0, rho_pr, rho_vpr};
use zeroacf::index::kappa;
use zeroacf::inference::upsilon_covariance;
use zeroacf::kernel::{argmin_cv, cv_curve, loo_weights, smooth_probabilities, Kernel, KernelPlan};
use zeroacf::series::{from_prices, PriceTable};
use zeroacf::ReturnSeries;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        Just(Kernel::Rectangular),
        Just(Kernel::Epanechnikov),
        Just(Kernel::Triangular)
    ]
}

/// Returns with roughly `zero_rate` exact zeros.
fn returns(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    (0.0f64..0.7, len).prop_flat_map(|(zero_rate, n)| {
        prop::collection::vec((0.0f64..1.0, -3.0f64..3.0), n).prop_map(move |v| {
            v.into_iter()
                .map(|(u, x)| if u < zero_rate { 0.0 } else { x })
                .collect()
        })
    })
}

fn scale() -> impl Strategy<Value = f64> {
    (prop::bool::ANY, -3.0f64..3.0).prop_map(|(neg, e)| {
        let c = 10f64.powf(e);
        if neg {
            -c
        } else {
            c
        }
    })
}

struct Estimates {
    rho0: Vec<f64>,
    pr: Vec<f64>,
    vpr: Vec<f64>,
    kappa: f64,
}

fn estimates(r: &ReturnSeries, m: usize, plan: &KernelPlan) -> Option<Estimates> {
    let probs = smooth_probabilities(&r.amplitude(), m, plan).ok()?;
    Some(Estimates {
        rho0: rho0(r, m).ok()?,
        pr: rho_pr(r, m).ok()?,
        vpr: rho_vpr(r, m, &probs).ok()?,
        kappa: kappa(r, m, &probs).ok()?.kappa,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn estimates_are_scale_free(v in returns(8..80), c in scale(), k in kernel(), b in 0.2f64..1.0, m in 1usize..4) {
        let r = ReturnSeries::new(v).unwrap();
        let plan = KernelPlan::fixed(k, b, m).unwrap();
        let base = estimates(&r, m, &plan);
        let scaled = estimates(&r.scaled(c), m, &plan);
        prop_assert_eq!(base.is_some(), scaled.is_some());
        if let (Some(x), Some(y)) = (base, scaled) {
            for (p, q) in x.rho0.iter().chain(&x.pr).chain(&x.vpr).zip(y.rho0.iter().chain(&y.pr).chain(&y.vpr)) {
                prop_assert!(close(*p, *q, 1e-12), "{} vs {}", p, q);
            }
            prop_assert!(close(x.kappa, y.kappa, 1e-12), "{} vs {}", x.kappa, y.kappa);
        }
    }

    #[test]
    fn pr_is_the_ratio_of_nonzero_pair_and_nonzero_means(v in returns(6..80), m in 1usize..4) {
        let r = ReturnSeries::new(v).unwrap();
        let Ok(pr) = rho_pr(&r, m) else { return Ok(()); };
        let x = r.values();
        let n = x.len();
        let nz: Vec<&f64> = x.iter().filter(|v| **v != 0.0).collect();
        let second = nz.iter().map(|v| *v * *v).sum::<f64>() / nz.len() as f64;
        for h in 1..=m {
            let pairs: Vec<f64> = (h..n)
                .filter(|&t| x[t] != 0.0 && x[t - h] != 0.0)
                .map(|t| x[t] * x[t - h])
                .collect();
            let want = pairs.iter().sum::<f64>() / pairs.len() as f64 / second;
            prop_assert!(close(pr[h - 1], want, 1e-12), "lag {}: {} vs {}", h, pr[h - 1], want);
            let ga = gamma_a(&r, h).unwrap() / gamma_a(&r, 0).unwrap();
            prop_assert!(close(pr[h - 1] * ga, rho0(&r, m).unwrap()[h - 1], 1e-12));
        }
    }

    #[test]
    fn pair_probability_never_exceeds_marginal(v in returns(4..120), k in kernel(), b in 0.05f64..1.0, m in 1usize..4) {
        prop_assume!(m < v.len());
        let r = ReturnSeries::new(v).unwrap();
        let plan = KernelPlan::fixed(k, b, m).unwrap();
        let Ok(probs) = smooth_probabilities(&r.amplitude(), m, &plan) else { return Ok(()); };
        for h in 1..=m {
            for (pth, pt) in probs.pair(h).unwrap().iter().zip(&probs.p_t) {
                prop_assert!(*pth <= *pt + 1e-15, "{} > {}", pth, pt);
                prop_assert!((0.0..=1.0 + 1e-15).contains(pth));
            }
        }
    }

    #[test]
    fn upsilon_covariance_is_psd(v in returns(6..80), m in 1usize..5) {
        prop_assume!(m < v.len());
        let r = ReturnSeries::new(v).unwrap();
        let cov = upsilon_covariance(&r, m).unwrap();
        let mat = DMatrix::from_fn(m, m, |i, j| cov.sigma_upsilon[i][j]);
        prop_assert_eq!(&mat, &mat.transpose());
        let trace = mat.trace();
        let eig = mat.symmetric_eigen().eigenvalues;
        prop_assert!(eig.iter().all(|&e| e >= -1e-10 * trace.max(f64::MIN_POSITIVE)), "{:?}", eig);
    }

    #[test]
    fn loo_weights_are_a_distribution(n in 2usize..60, t_frac in 0.0f64..1.0, b in 0.05f64..1.0, k in kernel()) {
        let t = ((n as f64 * t_frac) as usize).min(n - 1);
        if let Ok(w) = loo_weights(t, n, b, k) {
            prop_assert_eq!(w[t], 0.0);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
            prop_assert!(close(w.iter().sum::<f64>(), 1.0, 1e-12));
        }
    }

    #[test]
    fn raising_tolerance_only_removes_nonzeros(v in returns(1..60), t1 in 0.0f64..1.0, dt in 0.0f64..1.0) {
        let lo = ReturnSeries::with_tolerance(v.clone(), t1).unwrap().amplitude();
        let hi = ReturnSeries::with_tolerance(v, t1 + dt).unwrap().amplitude();
        prop_assert!(lo.iter().zip(&hi).all(|(a, b)| b <= a));
    }

    #[test]
    fn amplitude_matches_nonzero_returns(v in returns(1..60)) {
        let r = ReturnSeries::new(v.clone()).unwrap();
        let a = r.amplitude();
        for (x, ai) in v.iter().zip(&a) {
            prop_assert_eq!(*ai, if *x != 0.0 { 1.0 } else { 0.0 });
        }
        prop_assert!(close(r.empirical_zero_fraction(), 1.0 - a.iter().sum::<f64>() / a.len() as f64, 1e-15));
    }

    #[test]
    fn prices_are_rebuilt_from_log_returns(closes in prop::collection::vec(0.01f64..1000.0, 2..60)) {
        let table = PriceTable::from_closes(&closes).unwrap();
        let r = from_prices(&table, 0.0).unwrap();
        prop_assert_eq!(r.len(), closes.len() - 1);
        let mut level = closes[0].ln();
        for (i, x) in r.values().iter().enumerate() {
            level += x;
            prop_assert!(close(level, closes[i + 1].ln(), 1e-12));
        }
    }

    #[test]
    fn selected_bandwidth_attains_the_minimum(v in returns(10..80), h in 0usize..3, k in kernel()) {
        let r = ReturnSeries::new(v).unwrap();
        let grid = [0.1, 0.2, 0.35, 0.5, 0.8];
        let curve = cv_curve(&r.amplitude(), h, &grid, k).unwrap();
        if let Ok(i) = argmin_cv(&curve) {
            let best = curve[i].cv.unwrap();
            prop_assert!(curve.iter().filter_map(|p| p.cv).all(|cv| cv >= best - 1e-12 * best.max(1.0)));
        }
    }

    #[test]
    fn time_reversal_preserves_autocorrelations(v in returns(6..80), m in 1usize..4) {
        let r = ReturnSeries::new(v.clone()).unwrap();
        let rev = ReturnSeries::new(v.into_iter().rev().collect()).unwrap();
        match (rho_pr(&r, m), rho_pr(&rev, m)) {
            (Ok(a), Ok(b)) => {
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!(close(*x, *y, 1e-12));
                }
            }
            (a, b) => prop_assert_eq!(a.is_ok(), b.is_ok()),
        }
    }
}
