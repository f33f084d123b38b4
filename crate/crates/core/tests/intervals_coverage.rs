use approx::assert_abs_diff_eq;
use rayon::prelude::*;

use tulap_core::intervals::{
    cd_quantile, ci_approx_umpu, ci_bonferroni, ci_lower, ci_umau, ci_upper, confidence_distribution,
    IntervalResult,
};
use tulap_core::simulation::replicate_rng;
use tulap_core::{privatize, ump_pvalue, PrivacyParams, Side};

const N: u64 = 30;
const REPS: u64 = 1000;

fn releases(theta: f64, seed: u64) -> Vec<f64> {
    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    (0..REPS)
        .map(|r| {
            let mut rng = replicate_rng(seed, 0, r);
            let x = rand_distr::Distribution::sample(&rand_distr::Binomial::new(N, theta).unwrap(), &mut rng);
            privatize(x, N, &p, &mut rng).unwrap().z
        })
        .collect()
}

fn coverage(theta: f64, seed: u64, build: impl Fn(f64) -> IntervalResult + Sync) -> f64 {
    let zs = releases(theta, seed);
    let hits = zs.par_iter().filter(|&&z| build(z).contains(theta)).count();
    hits as f64 / REPS as f64
}

fn floor() -> f64 {
    0.95 - 3.0 * (0.95f64 * 0.05 / REPS as f64).sqrt()
}

#[test]
fn one_sided_coverage() {
    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    for (i, theta) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let lower = coverage(theta, 10 + i as u64, |z| ci_lower(z, N, 0.05, &p).unwrap());
        let upper = coverage(theta, 20 + i as u64, |z| ci_upper(z, N, 0.05, &p).unwrap());
        assert!(lower >= floor(), "lower bound coverage {lower} at {theta}");
        assert!(upper >= floor(), "upper bound coverage {upper} at {theta}");
    }
}

#[test]
fn one_sided_pins_endpoint() {
    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    let l = ci_lower(17.3, N, 0.05, &p).unwrap();
    let u = ci_upper(17.3, N, 0.05, &p).unwrap();
    assert_eq!(l.upper, 1.0);
    assert_eq!(u.lower, 0.0);
    assert!(l.lower < 17.3 / 30.0 && u.upper > 17.3 / 30.0);
}

#[test]
fn upper_reflects_lower() {
    let p = PrivacyParams::new(0.5, 0.01).unwrap();
    for z in [-2.0, 3.7, 11.0, 15.0, 24.2, 33.0] {
        let u = ci_upper(z, N, 0.05, &p).unwrap().upper;
        let l = ci_lower(N as f64 - z, N, 0.05, &p).unwrap().lower;
        assert_abs_diff_eq!(u, 1.0 - l, epsilon = 1e-6);
    }
}

#[test]
fn bonferroni_nested_in_half_level_interval() {
    // The level-alpha/2 two-sided interval (alpha/4 tails) always contains the
    // level-alpha one, so its false coverage is never smaller.
    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    for z in releases(0.3, 31).into_iter().take(200) {
        let tight = ci_bonferroni(z, N, 0.05, &p).unwrap();
        let wide = ci_bonferroni(z, N, 0.025, &p).unwrap();
        assert!(wide.lower <= tight.lower + 1e-9 && tight.upper <= wide.upper + 1e-9);
    }
}

#[test]
fn two_sided_coverage() {
    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    for (i, theta) in [0.15, 0.5].into_iter().enumerate() {
        let b = coverage(theta, 40 + i as u64, |z| ci_bonferroni(z, N, 0.05, &p).unwrap());
        let a = coverage(theta, 40 + i as u64, |z| ci_approx_umpu(z, N, 0.05, &p).unwrap());
        let u = coverage(theta, 40 + i as u64, |z| ci_umau(z, N, 0.05, &p).unwrap());
        for (name, c) in [("bonferroni", b), ("approx", a), ("umau", u)] {
            assert!(c >= floor() && c <= 0.95 + 3.0 * (0.95f64 * 0.05 / REPS as f64).sqrt(), "{name} coverage {c} at {theta}");
        }
    }
}

#[test]
fn umau_symmetric_at_center() {
    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    let ci = ci_umau(15.0, N, 0.05, &p).unwrap();
    assert!((ci.lower + ci.upper - 1.0).abs() < 2e-3, "{ci:?}");
    let ci = ci_approx_umpu(15.0, N, 0.05, &p).unwrap();
    assert!((ci.lower + ci.upper - 1.0).abs() < 2e-3, "{ci:?}");
}

#[test]
fn confidence_distribution_is_greater_pvalue() {
    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    let cd = confidence_distribution(12.4, N, &p, &grid).unwrap();
    for (t, h) in cd.grid.iter().zip(&cd.values) {
        if *t > 0.0 && *t < 1.0 {
            let pv = ump_pvalue(12.4, N, *t, &p, Side::Greater, None).unwrap();
            assert_abs_diff_eq!(*h, pv, epsilon = 1e-12);
        }
    }
    assert!(cd.values.windows(2).all(|w| w[0] <= w[1]));
    assert!(cd.at_zero > 0.0 && cd.at_one < 1.0);
    assert!(confidence_distribution(12.4, N, &p, &[0.5, 0.2]).is_err());
}

#[test]
fn median_estimate_is_median_unbiased() {
    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    let theta = 0.35;
    let zs = releases(theta, 50);
    let below = zs
        .par_iter()
        .filter(|&&z| cd_quantile(z, N, 0.5, &p).unwrap() <= theta)
        .count() as f64
        / REPS as f64;
    let se = (0.25 / REPS as f64).sqrt();
    assert!((below - 0.5).abs() < 3.0 * se, "P(estimate <= truth) = {below}");
}
