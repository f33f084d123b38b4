use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{check_probability, Error, Result};

/// Which null distribution a private count is referred to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NullKind {
    #[default]
    Binomial,
    Hypergeometric,
}

/// A probability vector on `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfVector {
    n: u64,
    weights: Vec<f64>,
}

const SUM_TOLERANCE: f64 = 1e-12;

impl PmfVector {
    /// Validates an arbitrary vector of weights; `n` is `weights.len() - 1`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPmf("no weights".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidPmf(format!("weight {i} is {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidPmf(format!("weights sum to {total}")));
        }
        Ok(Self {
            n: weights.len() as u64 - 1,
            weights,
        })
    }

    pub fn binomial(n: u64, theta: f64) -> Result<Self> {
        check_probability("theta", theta)?;
        Ok(LogChoose::new(n).binomial(theta))
    }

    /// Null law of the two-sample median statistic: `Hypergeometric(2n, n, n)`.
    pub fn hypergeometric(n: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("hypergeometric null needs n >= 1"));
        }
        let log_total = ln_binomial(2 * n, n);
        // Evaluate one half and mirror it so the symmetry is exact.
        let logs = (0..=n).map(|t| 2.0 * ln_binomial(n, t.min(n - t)) - log_total);
        Ok(Self::from_logs(n, logs))
    }

    fn from_logs(n: u64, logs: impl Iterator<Item = f64>) -> Self {
        let mut weights: Vec<f64> = logs.map(f64::exp).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Self { n, weights }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// `sum_x f(x) pmf[x]`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(x, w)| if *w == 0.0 { 0.0 } else { w * f(x as f64) })
            .sum()
    }

    /// Inner product with a vector indexed by `0..=n`.
    pub fn dot(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }
}

/// Cached `ln C(n, x)` for repeated binomial evaluation at one `n`.
#[derive(Debug, Clone)]
pub(crate) struct LogChoose {
    n: u64,
    coefficients: Vec<f64>,
}

impl LogChoose {
    pub(crate) fn new(n: u64) -> Self {
        Self {
            n,
            coefficients: (0..=n).map(|x| ln_binomial(n, x)).collect(),
        }
    }

    /// `Binomial(n, theta)`; `theta` is assumed to lie in `[0, 1]`.
    pub(crate) fn binomial(&self, theta: f64) -> PmfVector {
        let n = self.n;
        if theta == 0.0 || theta == 1.0 {
            let mut weights = vec![0.0; n as usize + 1];
            weights[if theta == 0.0 { 0 } else { n as usize }] = 1.0;
            return PmfVector { n, weights };
        }
        let ln_theta = theta.ln();
        let ln_rest = (-theta).ln_1p();
        let logs = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(x, c)| c + x as f64 * ln_theta + (n - x as u64) as f64 * ln_rest);
        PmfVector::from_logs(n, logs)
    }
}
