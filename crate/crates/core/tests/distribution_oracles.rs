mod common;

use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use tulap_core::{laplace_sample, privatize, PmfVector, PrivacyParams, TulapParams};

#[test]
fn cdf_at_one_matches_monte_carlo() {
    let d = TulapParams::new(0.0, 0.5, 0.0).unwrap();
    assert_abs_diff_eq!(d.cdf(1.0), 0.75, epsilon = 1e-15);
    let draws = 10_000_000u64;
    let hits: u64 = (0..100u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(77 + c);
            (0..draws / 100)
                .filter(|_| naive_tulap(0.5, f64::INFINITY, &mut rng) <= 1.0)
                .count() as u64
        })
        .sum();
    let mc = hits as f64 / draws as f64;
    let se = (0.75f64 * 0.25 / draws as f64).sqrt();
    assert!((mc - 0.75).abs() < 3.0 * se, "mc {mc}");
}

#[test]
fn cdf_matches_convolution() {
    for (b, q) in [(0.5, 0.0), (0.1, 0.0), (0.37, 1.0 / 6.0), (0.9, 0.4), (0.8, 0.05)] {
        let d = TulapParams::new(0.0, b, q).unwrap();
        for i in -400..=400 {
            let t = i as f64 * 0.0625 + 0.013;
            assert_abs_diff_eq!(d.cdf(t), convolution_cdf_truncated(t, b, q), epsilon = 1e-12);
        }
    }
}

#[test]
fn quantile_inverts_example() {
    let d = TulapParams::new(0.0, 0.5, 0.0).unwrap();
    assert_abs_diff_eq!(d.quantile(0.75).unwrap(), 1.0, epsilon = 1e-9);
}

#[test]
fn sampler_moments() {
    let d = TulapParams::new(0.0, 0.5, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<f64> = (0..1_000_000).map(|_| d.sample(&mut rng)).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    let target = 49.0 / 12.0;
    assert!(mean.abs() < 3.0 * (target / 1e6f64).sqrt(), "mean {mean}");
    assert!((var / target - 1.0).abs() < 0.01, "variance {var}");
}

#[test]
fn sampler_against_cdf_shifted_truncated() {
    let d = TulapParams::new(5.0, 0.3, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut xs: Vec<f64> = (0..1_000_000).map(|_| d.sample(&mut rng)).collect();
    xs.sort_by(f64::total_cmp);
    let ks = ks_statistic(&xs, |x| d.cdf(x));
    assert!(ks < 0.002, "ks {ks}");
}

#[test]
fn privacy_parameters_by_hand() {
    let p = PrivacyParams::new(2f64.ln(), 0.1).unwrap();
    assert_abs_diff_eq!(p.b, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(p.q, 1.0 / 6.0, epsilon = 1e-15);
}

#[test]
fn binomial_matches_products() {
    let pmf = PmfVector::binomial(30, 0.9).unwrap();
    let naive = naive_binomial(30, 0.9);
    assert_abs_diff_eq!(pmf.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    for (a, b) in pmf.weights().iter().zip(&naive) {
        assert!((a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-300, "{a} vs {b}");
    }
    for theta in (0..=10).map(|i| i as f64 / 10.0) {
        let pmf = PmfVector::binomial(30, theta).unwrap();
        for (a, b) in pmf.weights().iter().zip(naive_binomial(30, theta)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }
}

#[test]
fn hypergeometric_small() {
    let pmf = PmfVector::hypergeometric(2).unwrap();
    assert_abs_diff_eq!(pmf.weights()[0], 1.0 / 6.0, epsilon = 1e-15);
    assert_abs_diff_eq!(pmf.weights()[1], 2.0 / 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(pmf.weights()[2], 1.0 / 6.0, epsilon = 1e-15);
}

#[test]
fn laplace_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xs: Vec<f64> = (0..1_000_000).map(|_| laplace_sample(1.0, &mut rng).unwrap()).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    assert!((var / 2.0 - 1.0).abs() < 0.02, "variance {var}");
}

#[test]
fn release_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sharp = PrivacyParams::new(1e6, 0.0).unwrap();
    for _ in 0..1000 {
        let z = privatize(5, 10, &sharp, &mut rng).unwrap().z;
        assert!(z > 4.5 && z < 5.5);
    }
    assert!(privatize(11, 10, &sharp, &mut rng).is_err());

    let p = PrivacyParams::new(1.0, 0.0).unwrap();
    let zs: Vec<f64> = (0..100_000).map(|_| privatize(0, 10, &p, &mut rng).unwrap().z).collect();
    let mean = zs.iter().sum::<f64>() / zs.len() as f64;
    let b = p.b;
    let sd = (2.0 * b / (1.0 - b).powi(2) + 1.0 / 12.0).sqrt();
    assert!(mean.abs() < 3.0 * sd / (1e5f64).sqrt(), "mean {mean}");

    let p = PrivacyParams::new(0.7, 0.05).unwrap();
    let mut noise: Vec<f64> = (0..100_000)
        .map(|_| privatize(3, 10, &p, &mut rng).unwrap().z - 3.0)
        .collect();
    noise.sort_by(f64::total_cmp);
    assert!(ks_statistic(&noise, |t| p.noise().cdf(t)) < 0.005);
}
