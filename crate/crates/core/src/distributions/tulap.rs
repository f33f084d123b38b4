//! The Truncated-Uniform-Laplace (Tulap) distribution.
//!
//! `Tulap(m, b, 0)` is the law of `G1 - G2 + U + m` with `G1, G2` iid geometric
//! on `{0, 1, 2, ...}` with success probability `1 - b` and `U ~ Uniform(-1/2, 1/2)`.
//! `Tulap(m, b, q)` truncates that law to its central `1 - q` probability mass.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::distributions::PrivacyParams;
use crate::error::{Error, Result};
use crate::root::bisect_predicate;

/// Largest geometric base accepted; bases closer to one are clamped.
pub(crate) const MAX_BASE: f64 = 1.0 - 1e-12;

/// Location `m`, geometric base `b` and truncation mass `q`.
///
/// `b = 0` is accepted as the `epsilon -> infinity` limit, where the
/// distribution is exactly `Uniform(m - 1/2, m + 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TulapParams {
    pub m: f64,
    pub b: f64,
    pub q: f64,
}

impl TulapParams {
    pub fn new(m: f64, b: f64, q: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::domain(format!("location must be finite, got {m}")));
        }
        if !b.is_finite() || !(0.0..1.0).contains(&b) {
            return Err(Error::domain(format!("b must lie in [0, 1), got {b}")));
        }
        if !q.is_finite() || !(0.0..1.0).contains(&q) {
            return Err(Error::domain(format!("q must lie in [0, 1), got {q}")));
        }
        Ok(Self { m, b: b.min(MAX_BASE), q })
    }

    pub(crate) fn from_privacy(m: f64, privacy: &PrivacyParams) -> Self {
        Self {
            m,
            b: privacy.b.min(MAX_BASE),
            q: privacy.q,
        }
    }

    /// Same shape, new location.
    pub fn centered_at(&self, m: f64) -> Self {
        Self { m, ..*self }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        standard_cdf(x - self.m, self.b, self.q)
    }

    /// Inverse cdf, by bisection to full floating point resolution.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        // Level on the untruncated scale.
        let level = 0.5 * self.q + p * (1.0 - self.q);
        if self.b == 0.0 {
            return Ok(self.m + level - 0.5);
        }
        let tail = level.min(1.0 - level);
        let half_width = (tail * (1.0 + self.b)).ln() / self.b.ln() + 2.0;
        let (lo, hi) = bisect_predicate(-half_width, half_width, 0.0, |t| {
            untruncated_cdf(t, self.b) >= level
        });
        Ok(self.m + 0.5 * (lo + hi))
    }

    /// One draw by the geometric-difference construction, with rejection
    /// outside the central `1 - q` mass.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let geometric = (self.b > 0.0).then(|| {
            Geometric::new(1.0 - self.b).expect("success probability lies in (0, 1]")
        });
        let lower = 0.5 * self.q;
        let upper = 1.0 - 0.5 * self.q;
        loop {
            let u = rng.random::<f64>() - 0.5;
            let offset = match &geometric {
                Some(g) => {
                    let g1 = g.sample(rng) as f64;
                    let g2 = g.sample(rng) as f64;
                    g1 - g2 + u
                }
                None => u,
            };
            if self.q == 0.0 {
                return self.m + offset;
            }
            let f = untruncated_cdf(offset, self.b);
            if (lower..=upper).contains(&f) {
                return self.m + offset;
            }
        }
    }
}

/// Cdf of `Tulap(0, b, q)` at `t`.
pub(crate) fn standard_cdf(t: f64, b: f64, q: f64) -> f64 {
    let f0 = untruncated_cdf(t, b);
    if q == 0.0 {
        return f0;
    }
    ((f0 - 0.5 * q) / (1.0 - q)).clamp(0.0, 1.0)
}

/// Cdf of `Tulap(0, b, 0)` at `t`.
pub(crate) fn untruncated_cdf(t: f64, b: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if b == 0.0 {
        return (t + 0.5).clamp(0.0, 1.0);
    }
    if t <= 0.0 {
        lower_tail(t, b)
    } else {
        1.0 - lower_tail(-t, b)
    }
}

// F(t) for t <= 0, where the nearest integer r = [t] satisfies r <= 0.
fn lower_tail(t: f64, b: f64) -> f64 {
    if t == f64::NEG_INFINITY {
        return 0.0;
    }
    let r = t.round_ties_even();
    b.powf(-r) / (1.0 + b) * (b + (t - r + 0.5) * (1.0 - b))
}
