use serde::{Deserialize, Serialize};

use crate::distributions::{standard_cdf, TulapParams};
use crate::error::{Error, Result};

/// Smallest epsilon accepted; below this the guarantee is vacuous and the
/// geometric base is indistinguishable from one.
pub const MIN_EPSILON: f64 = 1e-10;

/// An `(epsilon, delta)` privacy budget together with the Tulap shape it
/// induces: `b = exp(-epsilon)` and `q = 2 delta b / (1 - b + 2 delta b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
    pub b: f64,
    pub q: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < MIN_EPSILON {
            return Err(Error::domain(format!(
                "epsilon must be finite and at least {MIN_EPSILON}, got {epsilon}"
            )));
        }
        if !delta.is_finite() || !(0.0..1.0).contains(&delta) {
            return Err(Error::domain(format!("delta must lie in [0, 1), got {delta}")));
        }
        let b = (-epsilon).exp();
        let q = if delta == 0.0 {
            0.0
        } else {
            2.0 * delta * b / (1.0 - b + 2.0 * delta * b)
        };
        Ok(Self { epsilon, delta, b, q })
    }

    /// The `epsilon = infinity` limit: noise reduces to `Uniform(-1/2, 1/2)`
    /// and the tests become the classical randomized binomial tests.
    pub fn non_private() -> Self {
        Self {
            epsilon: f64::INFINITY,
            delta: 0.0,
            b: 0.0,
            q: 0.0,
        }
    }

    pub fn is_private(&self) -> bool {
        self.epsilon.is_finite()
    }

    /// Noise distribution centred at `m`.
    pub fn tulap(&self, m: f64) -> TulapParams {
        TulapParams::from_privacy(m, self)
    }

    /// Noise distribution centred at zero.
    pub fn noise(&self) -> TulapParams {
        self.tulap(0.0)
    }

    /// Cdf of the centred noise at `t`.
    pub(crate) fn cdf(&self, t: f64) -> f64 {
        standard_cdf(t, self.b, self.q)
    }
}
