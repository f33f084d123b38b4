//! Reference implementations used as oracles. None of these call into the
//! library's own cdf, pmf or sampler code.

#![allow(dead_code)]

use rand::Rng;

/// `P(D = d)` for the discrete Laplace law `D = G1 - G2`.
fn discrete_laplace_pmf(d: i64, b: f64) -> f64 {
    (1.0 - b) / (1.0 + b) * b.powi(d.unsigned_abs() as i32)
}

/// Cdf of `D + U` by direct convolution over the support of `D`.
pub fn convolution_cdf(t: f64, b: f64) -> f64 {
    if b == 0.0 {
        return (t + 0.5).clamp(0.0, 1.0);
    }
    // Terms beyond |d| = K are below 1e-18 in total.
    let k = ((1e-18f64).ln() / b.ln()).ceil() as i64 + 2;
    let center = t.round() as i64;
    let lo = center - k;
    // Every d < lo satisfies t - d + 1/2 >= 1, so its whole mass counts.
    let below = if lo <= 0 {
        b.powi((1 - lo) as i32) / (1.0 + b)
    } else {
        1.0 - b.powi(lo as i32) / (1.0 + b)
    };
    let mut total = below;
    for d in lo..=(center + k) {
        total += discrete_laplace_pmf(d, b) * (t - d as f64 + 0.5).clamp(0.0, 1.0);
    }
    total.clamp(0.0, 1.0)
}

/// Truncated version of [`convolution_cdf`] keeping the central `1 - q` mass.
pub fn convolution_cdf_truncated(t: f64, b: f64, q: f64) -> f64 {
    ((convolution_cdf(t, b) - q / 2.0) / (1.0 - q)).clamp(0.0, 1.0)
}

/// Point `t` with `convolution_cdf(t) = p`, by bisection.
pub fn convolution_quantile(p: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (-1e4, 1e4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if convolution_cdf(mid, b) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Geometric count of failures before a success with probability `1 - b`,
/// by inversion: `P(G >= k) = b^k`.
pub fn geometric(b: f64, rng: &mut impl Rng) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    (u.ln() / b.ln()).floor()
}

/// Draws from `Tulap(0, b, q)`: `G1 - G2 + U`, rejected outside the central
/// `1 - q` mass whose edge is `edge`.
pub fn naive_tulap(b: f64, edge: f64, rng: &mut impl Rng) -> f64 {
    loop {
        let n = geometric(b, rng) - geometric(b, rng) + rng.random::<f64>() - 0.5;
        if n.abs() <= edge {
            return n;
        }
    }
}

/// Edge of the central `1 - q` mass of `D + U`; infinite when `q = 0`.
pub fn truncation_edge(b: f64, q: f64) -> f64 {
    if q == 0.0 {
        f64::INFINITY
    } else {
        convolution_quantile(1.0 - q / 2.0, b)
    }
}

/// `C(n, x) t^x (1 - t)^(n - x)` by plain multiplication.
pub fn naive_binomial(n: u64, theta: f64) -> Vec<f64> {
    (0..=n)
        .map(|x| {
            let mut c = 1.0f64;
            for i in 0..x {
                c = c * (n - i) as f64 / (i + 1) as f64;
            }
            c * theta.powi(x as i32) * (1.0 - theta).powi((n - x) as i32)
        })
        .collect()
}

/// Binomial draw by summing Bernoulli trials.
pub fn naive_binomial_draw(n: u64, theta: f64, rng: &mut impl Rng) -> u64 {
    (0..n).filter(|_| rng.random::<f64>() < theta).count() as u64
}

/// Kolmogorov-Smirnov distance between sorted data and a cdf.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the one-sample KS statistic, with Stephens'
/// small-sample correction.
pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let x = d * (sn + 0.12 + 0.11 / sn);
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `1 - Phi(t)` by composite Simpson integration of the normal density.
pub fn normal_upper_tail(t: f64) -> f64 {
    if t < 0.0 {
        return 1.0 - normal_upper_tail(-t);
    }
    let upper = t + 40.0;
    let steps = 200_000;
    let h = (upper - t) / steps as f64;
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = phi(t) + phi(upper);
    for i in 1..steps {
        let x = t + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * phi(x);
    }
    s * h / 3.0
}
