//! One-sided DP-UMP tests for a binomial proportion and their p-values.
//!
//! Every test here is a vector `phi[0..=n]` of rejection probabilities. The
//! optimal one-sided tests have the form `phi(x) = F(x - m)` where `F` is the
//! centred Tulap cdf, so they are realised by releasing `Z = X + N` once and
//! thresholding it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{NullKind, PmfVector, PrivacyParams};
use crate::error::{check_open_probability, check_probability, Error, Result};
use crate::root::{decreasing_root, increasing_root};

/// Slack allowed in the DP inequalities before a vector is declared invalid.
pub const DP_SLACK: f64 = 1e-12;

/// Direction of a one-sided alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `H0: theta <= theta0` against `H1: theta > theta0`.
    Greater,
    /// `H0: theta >= theta0` against `H1: theta < theta0`.
    Less,
}

/// How a test vector was built, with the constants that determine it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestKind {
    OneSided { side: Side, m: f64 },
    Bonferroni { m_greater: f64, m_less: f64 },
    Umpu { k: f64, m: f64, residual: f64 },
    ApproxUmpu { k: f64, m: f64 },
    Constant,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestMeta {
    pub theta0: f64,
    pub alpha: f64,
    pub privacy: PrivacyParams,
    pub kind: TestKind,
}

/// A randomized test on `0..=n`: reject with probability `phi[x]` when `X = x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVector {
    pub n: u64,
    pub phi: Vec<f64>,
    pub meta: TestMeta,
}

impl TestVector {
    pub fn new(phi: Vec<f64>, meta: TestMeta) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::domain("test vector is empty"));
        }
        for (x, p) in phi.iter().enumerate() {
            if !(p.is_finite() && (0.0..=1.0).contains(p)) {
                return Err(Error::domain(format!("phi[{x}] = {p} is not a probability")));
            }
        }
        Ok(Self {
            n: phi.len() as u64 - 1,
            phi,
            meta,
        })
    }

    /// The constant test `phi = alpha`.
    pub fn constant(n: u64, alpha: f64, theta0: f64, privacy: PrivacyParams) -> Result<Self> {
        check_probability("alpha", alpha)?;
        let meta = TestMeta {
            theta0,
            alpha,
            privacy,
            kind: TestKind::Constant,
        };
        Self::new(vec![alpha; n as usize + 1], meta)
    }

    /// Exact rejection probability when `X ~ Binomial(n, theta)`.
    pub fn power(&self, theta: f64) -> Result<f64> {
        Ok(PmfVector::binomial(self.n, theta)?.dot(&self.phi))
    }

    /// Rejection probability under the null value the test was built for.
    pub fn size(&self) -> Result<f64> {
        self.power(self.meta.theta0)
    }
}

/// A single noisy release `Z = X + N` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivateSummary {
    pub z: f64,
    pub n: u64,
    pub privacy: PrivacyParams,
    #[serde(default)]
    pub null_kind: NullKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Reject,
    FailToReject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub reject: bool,
    pub rejection_probability: f64,
}

impl Decision {
    pub fn verdict(&self) -> Verdict {
        if self.reject {
            Verdict::Reject
        } else {
            Verdict::FailToReject
        }
    }
}

/// Which of the four DP inequalities is tightest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpConstraint {
    /// `phi(x) <= e^eps phi(x-1) + delta`
    Up,
    /// `phi(x-1) <= e^eps phi(x) + delta`
    Down,
    /// `1 - phi(x) <= e^eps (1 - phi(x-1)) + delta`
    UpComplement,
    /// `1 - phi(x-1) <= e^eps (1 - phi(x)) + delta`
    DownComplement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpReport {
    /// Largest amount by which any inequality is exceeded, or 0.
    pub max_violation: f64,
    /// Location of the worst inequality, when there is one.
    pub worst: Option<(u64, DpConstraint)>,
    pub constraints_checked: u64,
    pub passes: bool,
}

/// Releases `Z = x + N` with `N ~ Tulap(0, b, q)`.
pub fn privatize<R: Rng + ?Sized>(
    x: u64,
    n: u64,
    privacy: &PrivacyParams,
    rng: &mut R,
) -> Result<PrivateSummary> {
    if x > n {
        return Err(Error::Index { index: x, n });
    }
    Ok(PrivateSummary {
        z: x as f64 + privacy.noise().sample(rng),
        n,
        privacy: *privacy,
        null_kind: NullKind::Binomial,
    })
}

fn check_null(theta0: f64, alpha: f64) -> Result<()> {
    check_open_probability("theta0", theta0)?;
    check_open_probability("alpha", alpha)
}

/// Offset `m` giving the one-sided test of exact size `alpha`.
///
/// For `Greater` the test is `F(x - m)`; for `Less` it is `F(m - x)`.
pub fn calibrate_m(
    n: u64,
    theta0: f64,
    alpha: f64,
    privacy: &PrivacyParams,
    side: Side,
) -> Result<f64> {
    check_null(theta0, alpha)?;
    let pmf = PmfVector::binomial(n, theta0)?;
    calibrate_m_for(&pmf, alpha, privacy, side)
}

/// [`calibrate_m`] against an arbitrary null pmf.
pub fn calibrate_m_for(
    pmf: &PmfVector,
    alpha: f64,
    privacy: &PrivacyParams,
    side: Side,
) -> Result<f64> {
    check_open_probability("alpha", alpha)?;
    let hi = pmf.n() as f64 + 1.0;
    match side {
        Side::Greater => decreasing_root(
            "size calibration",
            |m| pmf.expect(|x| privacy.cdf(x - m)),
            alpha,
            -1.0,
            hi,
            0.0,
        ),
        Side::Less => increasing_root(
            "size calibration",
            |m| pmf.expect(|x| privacy.cdf(m - x)),
            alpha,
            -1.0,
            hi,
            0.0,
        ),
    }
}

/// The one-sided DP-UMP test of size `alpha`.
pub fn test_vector_one_sided(
    n: u64,
    theta0: f64,
    alpha: f64,
    privacy: &PrivacyParams,
    side: Side,
) -> Result<TestVector> {
    let m = calibrate_m(n, theta0, alpha, privacy, side)?;
    let phi = (0..=n)
        .map(|x| {
            let x = x as f64;
            match side {
                Side::Greater => privacy.cdf(x - m),
                Side::Less => privacy.cdf(m - x),
            }
        })
        .collect();
    TestVector::new(
        phi,
        TestMeta {
            theta0,
            alpha,
            privacy: *privacy,
            kind: TestKind::OneSided { side, m },
        },
    )
}

/// Exact one-sided p-value `P(X + N >= z | z)` (or `<=` for `Less`).
///
/// `null_pmf` replaces `Binomial(n, theta0)` when given; `theta0` is then
/// ignored.
pub fn ump_pvalue(
    z: f64,
    n: u64,
    theta0: f64,
    privacy: &PrivacyParams,
    side: Side,
    null_pmf: Option<&PmfVector>,
) -> Result<f64> {
    if z.is_nan() {
        return Err(Error::domain("z is NaN"));
    }
    let owned;
    let pmf = match null_pmf {
        Some(p) => {
            if p.n() != n {
                return Err(Error::InvalidPmf(format!(
                    "null pmf has n = {}, expected {n}",
                    p.n()
                )));
            }
            p
        }
        None => {
            check_probability("theta0", theta0)?;
            owned = PmfVector::binomial(n, theta0)?;
            &owned
        }
    };
    Ok(pvalue_from_pmf(z, pmf, privacy, side))
}

pub(crate) fn pvalue_from_pmf(z: f64, pmf: &PmfVector, privacy: &PrivacyParams, side: Side) -> f64 {
    let p = match side {
        Side::Greater => pmf.expect(|x| privacy.cdf(x - z)),
        Side::Less => pmf.expect(|x| privacy.cdf(z - x)),
    };
    p.clamp(0.0, 1.0)
}

/// Draws the randomized decision of `tv` at the observed count.
pub fn decide<R: Rng + ?Sized>(tv: &TestVector, x: u64, rng: &mut R) -> Result<Decision> {
    let p = *tv
        .phi
        .get(x as usize)
        .ok_or(Error::Index { index: x, n: tv.n })?;
    let reject = rng.random::<f64>() < p;
    Ok(Decision {
        reject,
        rejection_probability: p,
    })
}

/// Checks the `(epsilon, delta)`-DP inequalities between neighbouring counts.
pub fn verify_dp(tv: &TestVector, privacy: &PrivacyParams) -> DpReport {
    let checked = 4 * tv.n;
    if !privacy.is_private() {
        return DpReport {
            max_violation: 0.0,
            worst: None,
            constraints_checked: checked,
            passes: true,
        };
    }
    let e = privacy.epsilon.exp();
    let d = privacy.delta;
    let mut max_violation = 0.0;
    let mut worst = None;
    for (i, pair) in tv.phi.windows(2).enumerate() {
        let (prev, cur) = (pair[0], pair[1]);
        let x = i as u64 + 1;
        let gaps = [
            (cur - (e * prev + d), DpConstraint::Up),
            (prev - (e * cur + d), DpConstraint::Down),
            ((1.0 - cur) - (e * (1.0 - prev) + d), DpConstraint::UpComplement),
            ((1.0 - prev) - (e * (1.0 - cur) + d), DpConstraint::DownComplement),
        ];
        for (gap, which) in gaps {
            if gap > max_violation {
                max_violation = gap;
                worst = Some((x, which));
            }
        }
    }
    DpReport {
        max_violation,
        worst,
        constraints_checked: checked,
        passes: max_violation <= DP_SLACK,
    }
}
