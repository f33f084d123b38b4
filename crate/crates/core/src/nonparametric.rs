//! Distribution-free tests for continuous data through sensitivity-one counts:
//! the sign test for paired data and the median test for two samples.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{PmfVector, PrivacyParams};
use crate::error::{Error, Result};
use crate::one_sided::{privatize, ump_pvalue, Side};
use crate::two_sided::approx_pvalue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    Greater,
    Less,
    TwoSided,
}

/// Paired observations. Pairs with `x == y` carry no sign and are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pairs: Vec<(f64, f64)>,
    n_effective: u64,
}

impl PairedSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.iter().any(|(x, y)| x.is_nan() || y.is_nan()) {
            return Err(Error::domain("paired sample contains NaN"));
        }
        let n_effective = pairs.iter().filter(|(x, y)| x != y).count() as u64;
        Ok(Self { pairs, n_effective })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn n_effective(&self) -> u64 {
        self.n_effective
    }

    pub fn tied(&self) -> u64 {
        self.pairs.len() as u64 - self.n_effective
    }
}

/// Two independent samples of equal size with no repeated values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TwoSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::domain(format!(
                "samples must have equal sizes, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(Error::domain("samples are empty"));
        }
        let mut all: Vec<f64> = xs.iter().chain(&ys).copied().collect();
        if all.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("sample contains NaN"));
        }
        all.sort_by(f64::total_cmp);
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Ties(format!("value {} occurs more than once", w[0])));
        }
        Ok(Self { xs, ys })
    }

    pub fn n(&self) -> u64 {
        self.xs.len() as u64
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

/// Released value and p-value of a private nonparametric test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub z: f64,
    pub p_value: f64,
    /// Size of the null distribution's support minus one.
    pub n: u64,
    pub alternative: Alternative,
    pub privacy: PrivacyParams,
}

/// `(#{x > y}, n_effective)` over the untied pairs.
pub fn sign_statistic(sample: &PairedSample) -> Result<(u64, u64)> {
    if sample.n_effective == 0 {
        return Err(Error::Ties("every pair is tied".into()));
    }
    let t = sample.pairs.iter().filter(|(x, y)| x > y).count() as u64;
    Ok((t, sample.n_effective))
}

/// P-value of a released sign statistic `z` on `n` untied pairs.
pub fn sign_pvalue(
    z: f64,
    n: u64,
    theta0: f64,
    privacy: &PrivacyParams,
    alternative: Alternative,
) -> Result<f64> {
    match alternative {
        Alternative::Greater => ump_pvalue(z, n, theta0, privacy, Side::Greater, None),
        Alternative::Less => ump_pvalue(z, n, theta0, privacy, Side::Less, None),
        Alternative::TwoSided => approx_pvalue(z, n, theta0, privacy, None),
    }
}

/// Privatizes the sign statistic and returns its p-value against
/// `P(X > Y) = theta0`.
pub fn sign_test<R: Rng + ?Sized>(
    sample: &PairedSample,
    theta0: f64,
    privacy: &PrivacyParams,
    rng: &mut R,
    alternative: Alternative,
) -> Result<TestOutcome> {
    let (t, n) = sign_statistic(sample)?;
    let z = privatize(t, n, privacy, rng)?.z;
    Ok(TestOutcome {
        z,
        p_value: sign_pvalue(z, n, theta0, privacy, alternative)?,
        n,
        alternative,
        privacy: *privacy,
    })
}

/// Number of `xs` among the `n` largest of the pooled `2n` values.
pub fn median_statistic(ts: &TwoSample) -> u64 {
    let mut all: Vec<f64> = ts.xs.iter().chain(&ts.ys).copied().collect();
    all.sort_by(f64::total_cmp);
    let cut = all[ts.xs.len() - 1];
    ts.xs.iter().filter(|&&x| x > cut).count() as u64
}

/// P-value of a released median statistic `z` for samples of size `n`.
pub fn median_pvalue(z: f64, n: u64, privacy: &PrivacyParams, alternative: Alternative) -> Result<f64> {
    let pmf = PmfVector::hypergeometric(n)?;
    match alternative {
        Alternative::Greater => ump_pvalue(z, n, 0.5, privacy, Side::Greater, Some(&pmf)),
        Alternative::Less => ump_pvalue(z, n, 0.5, privacy, Side::Less, Some(&pmf)),
        Alternative::TwoSided => approx_pvalue(z, n, 0.5, privacy, Some(&pmf)),
    }
}

/// Privatizes the median statistic and returns its p-value for equal medians.
pub fn median_test<R: Rng + ?Sized>(
    ts: &TwoSample,
    privacy: &PrivacyParams,
    rng: &mut R,
    alternative: Alternative,
) -> Result<TestOutcome> {
    let n = ts.n();
    let z = privatize(median_statistic(ts), n, privacy, rng)?.z;
    Ok(TestOutcome {
        z,
        p_value: median_pvalue(z, n, privacy, alternative)?,
        n,
        alternative,
        privacy: *privacy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_counts() {
        let s = PairedSample::new(vec![(2.0, 1.0), (3.0, 1.0), (0.0, 1.0), (5.0, 4.0), (9.0, 8.0)]).unwrap();
        assert_eq!(sign_statistic(&s).unwrap(), (4, 5));
        let s = PairedSample::new(vec![
            (2.0, 1.0),
            (1.0, 1.0),
            (0.0, 1.0),
            (5.0, 4.0),
            (9.0, 8.0),
            (0.0, 3.0),
        ])
        .unwrap();
        assert_eq!(sign_statistic(&s).unwrap(), (3, 5));
        assert_eq!(s.tied(), 1);
        let s = PairedSample::new(vec![(1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert!(matches!(sign_statistic(&s), Err(Error::Ties(_))));
    }

    #[test]
    fn median_counts() {
        let ts = TwoSample::new(vec![4.0, 5.0, 6.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(median_statistic(&ts), 3);
        // y < x < y < x: pooled order y1 x1 y2 x2, top half {y2, x2}.
        let ts = TwoSample::new(vec![2.0, 4.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(median_statistic(&ts), 1);
        let a = TwoSample::new(vec![0.3, 7.0, 2.5, 9.1], vec![1.0, 4.4, 8.0, 0.1]).unwrap();
        let b = TwoSample::new(a.ys().to_vec(), a.xs().to_vec()).unwrap();
        assert_eq!(median_statistic(&a) + median_statistic(&b), 4);
    }

    #[test]
    fn median_validation() {
        assert!(matches!(
            TwoSample::new(vec![1.0, 2.0], vec![2.0, 3.0]),
            Err(Error::Ties(_))
        ));
        assert!(TwoSample::new(vec![1.0], vec![2.0, 3.0]).is_err());
        assert!(TwoSample::new(vec![], vec![]).is_err());
    }

    #[test]
    fn sensitivity_one() {
        let xs = [0.4, 2.2, 5.0, 3.1, 7.7];
        let ys = [1.0, 6.3, 0.2, 4.4, 2.9];
        let base = median_statistic(&TwoSample::new(xs.to_vec(), ys.to_vec()).unwrap()) as i64;
        for i in 0..5 {
            for v in [-10.0, 2.5, 3.0, 5.5, 10.0] {
                let mut changed = xs.to_vec();
                changed[i] = v;
                if let Ok(ts) = TwoSample::new(changed, ys.to_vec()) {
                    assert!((median_statistic(&ts) as i64 - base).abs() <= 1);
                }
            }
        }
    }
}
