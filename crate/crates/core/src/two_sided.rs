//! Two-sided tests of `H0: theta = theta0`.
//!
//! * Bonferroni: both one-sided UMP tests at level `alpha / 2`.
//! * UMPU: `phi(x) = F(|x - k| - m)` with `(k, m)` fixed by exact size and
//!   `E[(X - n theta0) phi(X)] = 0`.
//! * Approximate UMPU: the same form with `k = n theta0`, and the p-value
//!   `P(|X + N - n theta0| >= |z - n theta0|)`.
//! * UMAU p-value: the smallest level at which `|z - k| >= m` rejects, over
//!   the family of unbiased regions `{|Z - k| >= m}` on the released value.

use serde::{Deserialize, Serialize};

use crate::distributions::{PmfVector, PrivacyParams};
use crate::error::{check_open_probability, Error, Result};
use crate::one_sided::{calibrate_m, pvalue_from_pmf, Side, TestKind, TestMeta, TestVector};
use crate::root::{bisect_predicate, decreasing_root, golden_max, increasing_root};

/// Largest tolerated unbiasedness residual for a UMPU solution.
pub const UNBIASEDNESS_TOLERANCE: f64 = 1e-6;

/// Smallest and largest level probed by [`umau_pvalue_search`].
pub const UMAU_ALPHA_RANGE: (f64, f64) = (1e-6, 1.0 - 1e-6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmpuSolution {
    pub k: f64,
    pub m: f64,
    pub n: u64,
    pub theta0: f64,
    pub alpha: f64,
    pub privacy: PrivacyParams,
    pub size_residual: f64,
    pub unbiasedness_residual: f64,
}

impl UmpuSolution {
    pub fn phi(&self, x: f64) -> f64 {
        folded(&self.privacy, x, self.k, self.m)
    }
}

fn folded(privacy: &PrivacyParams, x: f64, k: f64, m: f64) -> f64 {
    if x >= k {
        privacy.cdf(x - k - m)
    } else {
        privacy.cdf(k - x - m)
    }
}

fn check_two_sided(n: u64, theta0: f64) -> Result<()> {
    check_open_probability("theta0", theta0)?;
    if n == 0 {
        return Err(Error::domain("two-sided tests need n >= 1"));
    }
    Ok(())
}

/// `min(1, 2 min(p, 1 - p))` for the one-sided p-value `p`.
pub fn bonferroni_pvalue(z: f64, n: u64, theta0: f64, privacy: &PrivacyParams) -> Result<f64> {
    check_two_sided(n, theta0)?;
    if z.is_nan() {
        return Err(Error::domain("z is NaN"));
    }
    let pmf = PmfVector::binomial(n, theta0)?;
    let greater = pvalue_from_pmf(z, &pmf, privacy, Side::Greater);
    let less = pvalue_from_pmf(z, &pmf, privacy, Side::Less);
    Ok((2.0 * greater.min(less)).min(1.0))
}

/// Sum of the two one-sided UMP tests at level `alpha / 2`.
pub fn bonferroni_test_vector(
    n: u64,
    theta0: f64,
    alpha: f64,
    privacy: &PrivacyParams,
) -> Result<TestVector> {
    check_two_sided(n, theta0)?;
    check_open_probability("alpha", alpha)?;
    let m_greater = calibrate_m(n, theta0, alpha / 2.0, privacy, Side::Greater)?;
    let m_less = calibrate_m(n, theta0, alpha / 2.0, privacy, Side::Less)?;
    let phi = (0..=n)
        .map(|x| {
            let x = x as f64;
            (privacy.cdf(x - m_greater) + privacy.cdf(m_less - x)).min(1.0)
        })
        .collect();
    TestVector::new(
        phi,
        TestMeta {
            theta0,
            alpha,
            privacy: *privacy,
            kind: TestKind::Bonferroni { m_greater, m_less },
        },
    )
}

/// Size and unbiasedness moments of a family of tests indexed by a centre.
struct Moments<'a> {
    pmf: &'a PmfVector,
    center: f64,
}

impl Moments<'_> {
    fn size(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.pmf.expect(phi)
    }

    fn tilt(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.pmf.expect(|x| (x - self.center) * phi(x))
    }
}

/// Solves for `(k, m)` by nested bisection: `m(k)` for exact size, then `k` on
/// the sign of the unbiasedness moment, which is positive at `k = -1` and
/// negative at `k = n + 1`.
fn solve_center<P>(
    what: &'static str,
    n: u64,
    alpha: f64,
    moments: &Moments<'_>,
    phi: P,
) -> Result<(f64, f64, f64)>
where
    P: Fn(f64, f64, f64) -> f64,
{
    let top = n as f64 + 1.0;
    let m_of = |k: f64| {
        decreasing_root(what, |m| moments.size(|x| phi(x, k, m)), alpha, -1.0, top, 0.0)
    };
    let h = |k: f64| -> Result<(f64, f64)> {
        let m = m_of(k)?;
        Ok((m, moments.tilt(|x| phi(x, k, m))))
    };
    let (_, h_lo) = h(-1.0)?;
    let (_, h_hi) = h(top)?;
    if h_lo < 0.0 || h_hi > 0.0 {
        return Err(Error::convergence(
            what,
            format!("no sign change of the unbiasedness moment: h(-1) = {h_lo}, h(n+1) = {h_hi}"),
        ));
    }
    let mut failure = None;
    let (a, b) = bisect_predicate(-1.0, top, 1e-12, |k| match h(k) {
        Ok((_, v)) => v <= 0.0,
        Err(e) => {
            failure.get_or_insert(e);
            true
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (ma, ha) = h(a)?;
    let (mb, hb) = h(b)?;
    Ok(if ha.abs() <= hb.abs() { (a, ma, ha) } else { (b, mb, hb) })
}

/// The DP-UMPU test `phi(x) = F(|x - k| - m)`.
pub fn umpu_solve(
    n: u64,
    theta0: f64,
    alpha: f64,
    privacy: &PrivacyParams,
) -> Result<UmpuSolution> {
    check_two_sided(n, theta0)?;
    check_open_probability("alpha", alpha)?;
    let pmf = PmfVector::binomial(n, theta0)?;
    let moments = Moments {
        pmf: &pmf,
        center: n as f64 * theta0,
    };
    let (k, m, residual) = solve_center("UMPU solve", n, alpha, &moments, |x, k, m| {
        folded(privacy, x, k, m)
    })?;
    if residual.abs() > UNBIASEDNESS_TOLERANCE {
        return Err(Error::convergence(
            "UMPU solve",
            format!("unbiasedness residual {residual} at k = {k}, m = {m}"),
        ));
    }
    let size = moments.size(|x| folded(privacy, x, k, m));
    Ok(UmpuSolution {
        k,
        m,
        n,
        theta0,
        alpha,
        privacy: *privacy,
        size_residual: size - alpha,
        unbiasedness_residual: residual,
    })
}

pub fn umpu_test_vector(
    n: u64,
    theta0: f64,
    alpha: f64,
    privacy: &PrivacyParams,
) -> Result<TestVector> {
    let s = umpu_solve(n, theta0, alpha, privacy)?;
    TestVector::new(
        (0..=n).map(|x| s.phi(x as f64)).collect(),
        TestMeta {
            theta0,
            alpha,
            privacy: *privacy,
            kind: TestKind::Umpu {
                k: s.k,
                m: s.m,
                residual: s.unbiasedness_residual,
            },
        },
    )
}

/// The UMPU form centred at `k = n theta0`, calibrated to exact size.
pub fn approx_test_vector(
    n: u64,
    theta0: f64,
    alpha: f64,
    privacy: &PrivacyParams,
) -> Result<TestVector> {
    check_two_sided(n, theta0)?;
    check_open_probability("alpha", alpha)?;
    let pmf = PmfVector::binomial(n, theta0)?;
    let k = n as f64 * theta0;
    let m = decreasing_root(
        "approximate UMPU calibration",
        |m| pmf.expect(|x| folded(privacy, x, k, m)),
        alpha,
        -1.0,
        n as f64 + 1.0,
        0.0,
    )?;
    TestVector::new(
        (0..=n).map(|x| folded(privacy, x as f64, k, m)).collect(),
        TestMeta {
            theta0,
            alpha,
            privacy: *privacy,
            kind: TestKind::ApproxUmpu { k, m },
        },
    )
}

/// `P(|X + N - n theta0| >= |z - n theta0|)` under the null.
///
/// `null_pmf` replaces `Binomial(n, theta0)` when given; the centre stays at
/// `n theta0`.
pub fn approx_pvalue(
    z: f64,
    n: u64,
    theta0: f64,
    privacy: &PrivacyParams,
    null_pmf: Option<&PmfVector>,
) -> Result<f64> {
    check_two_sided(n, theta0)?;
    if z.is_nan() {
        return Err(Error::domain("z is NaN"));
    }
    let pmf = match null_pmf {
        Some(p) if p.n() != n => {
            return Err(Error::InvalidPmf(format!(
                "null pmf has n = {}, expected {n}",
                p.n()
            )))
        }
        Some(p) => p.clone(),
        None => PmfVector::binomial(n, theta0)?,
    };
    Ok(approx_pvalue_pmf(z, &pmf, n as f64 * theta0, privacy))
}

pub(crate) fn approx_pvalue_pmf(z: f64, pmf: &PmfVector, center: f64, privacy: &PrivacyParams) -> f64 {
    let t = (z - center).abs();
    let upper = pmf.expect(|x| privacy.cdf(x - center - t));
    let lower = pmf.expect(|x| privacy.cdf(center - t - x));
    (upper + lower).clamp(0.0, 1.0)
}

/// Tail sums for the two-tailed regions `{Z <= lo} u {Z >= hi}`.
///
/// The region with cut points `lo < hi` is unbiased when `g(lo) = g(hi)` with
/// `g(c) = E[(X - n theta0) 1{X + N >= c}]`. `g` vanishes at both infinities
/// and is quasi-concave, so each cut point above its peak has exactly one
/// partner below it.
pub(crate) struct LevelSet<'a> {
    pmf: &'a PmfVector,
    privacy: &'a PrivacyParams,
    center: f64,
}

impl<'a> LevelSet<'a> {
    pub(crate) fn new(pmf: &'a PmfVector, privacy: &'a PrivacyParams, center: f64) -> Self {
        Self {
            pmf,
            privacy,
            center,
        }
    }

    fn upper(&self, c: f64) -> f64 {
        self.pmf.expect(|x| self.privacy.cdf(x - c))
    }

    fn lower(&self, c: f64) -> f64 {
        self.pmf.expect(|x| self.privacy.cdf(c - x))
    }

    // Two expressions for g; each avoids cancellation on its own side.
    fn g_right(&self, c: f64) -> f64 {
        self.pmf
            .expect(|x| (x - self.center) * self.privacy.cdf(x - c))
    }

    fn g_left(&self, c: f64) -> f64 {
        -self
            .pmf
            .expect(|x| (x - self.center) * self.privacy.cdf(c - x))
    }

    fn peak(&self) -> f64 {
        golden_max(|c| self.g_right(c), -1.0, self.pmf.n() as f64 + 1.0, 1e-12)
    }

    /// Interval on which `g` is within rounding of its maximum. `g` is
    /// piecewise linear, so for symmetric nulls the top can be flat.
    fn plateau(&self, peak: f64) -> (f64, f64) {
        let top = self.g_right(peak);
        let level = top - 1e-12 * top.abs().max(f64::MIN_POSITIVE);
        let n = self.pmf.n() as f64;
        let (_, left) = bisect_predicate(-1.0, peak, 0.0, |c| self.g_left(c) >= level);
        let (right, _) = bisect_predicate(peak, n + 1.0, 0.0, |c| self.g_right(c) < level);
        if right - left < 1e-9 {
            (peak, peak)
        } else {
            (left, right)
        }
    }

    /// Smallest level at which the unbiased region has `z` on its boundary.
    ///
    /// On a flat top the unbiased regions are not unique; cut points there are
    /// paired by reflection about the middle of the flat, which keeps the
    /// regions nested and continuous in the level.
    pub(crate) fn pvalue(&self, z: f64) -> Result<f64> {
        let peak = self.peak();
        let (left, right) = self.plateau(peak);
        let (lo, hi) = if (left..=right).contains(&z) {
            let partner = left + right - z;
            (z.min(partner), z.max(partner))
        } else if z > right {
            // The two expressions for g differ by rounding; never aim above
            // the value at the bracket start.
            let target = self.g_right(z).min(self.g_left(left));
            let lo = increasing_root("UMAU partner", |c| self.g_left(c), target, left - 1.0, left, 0.0)?;
            (lo.min(left), z)
        } else {
            let target = self.g_left(z).min(self.g_right(right));
            let hi = decreasing_root("UMAU partner", |c| self.g_right(c), target, right, right + 1.0, 0.0)?;
            (z, hi.max(right))
        };
        Ok((self.upper(hi) + self.lower(lo)).clamp(0.0, 1.0))
    }
}

/// Exact UMAU p-value, computed by following the unbiased two-tailed regions
/// to the one whose boundary passes through `z`.
pub fn umau_pvalue(z: f64, n: u64, theta0: f64, privacy: &PrivacyParams) -> Result<f64> {
    check_two_sided(n, theta0)?;
    if z.is_nan() {
        return Err(Error::domain("z is NaN"));
    }
    let pmf = PmfVector::binomial(n, theta0)?;
    LevelSet::new(&pmf, privacy, n as f64 * theta0).pvalue(z)
}

/// Centre `k` and half-width `m` of the unbiased region `{|Z - k| >= m}` of
/// size `alpha`, solved directly by nested bisection.
pub fn umau_region(
    n: u64,
    theta0: f64,
    alpha: f64,
    privacy: &PrivacyParams,
) -> Result<(f64, f64)> {
    check_two_sided(n, theta0)?;
    check_open_probability("alpha", alpha)?;
    let pmf = PmfVector::binomial(n, theta0)?;
    let moments = Moments {
        pmf: &pmf,
        center: n as f64 * theta0,
    };
    let (k, m, _) = solve_center("UMAU region", n, alpha, &moments, |x, k, m| {
        privacy.cdf(x - k - m) + privacy.cdf(k - m - x)
    })?;
    Ok((k, m))
}

/// UMAU p-value by bisection over the level on the predicate
/// `|z - k(alpha)| >= m(alpha)`, to absolute tolerance `tol`.
///
/// Returns the lower end of [`UMAU_ALPHA_RANGE`] if even that level rejects
/// and `1` if no level in the range does.
pub fn umau_pvalue_search(
    z: f64,
    n: u64,
    theta0: f64,
    privacy: &PrivacyParams,
    tol: f64,
) -> Result<f64> {
    let rejects = |alpha: f64| -> Result<bool> {
        let (k, m) = umau_region(n, theta0, alpha, privacy)?;
        Ok((z - k).abs() >= m)
    };
    let (lo, hi) = UMAU_ALPHA_RANGE;
    if rejects(lo)? {
        return Ok(lo);
    }
    if !rejects(hi)? {
        return Ok(1.0);
    }
    let mut failure = None;
    let (_, a) = bisect_predicate(lo, hi, tol, |alpha| match rejects(alpha) {
        Ok(r) => r,
        Err(e) => {
            failure.get_or_insert(e);
            true
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityProbe {
    pub alphas: Vec<f64>,
    pub rejects: Vec<bool>,
    pub monotone: bool,
}

/// Evaluates the UMAU rejection predicate on a 50-point level grid and
/// reports whether it switches from accept to reject at most once.
pub fn umau_monotonicity_probe(
    z: f64,
    n: u64,
    theta0: f64,
    privacy: &PrivacyParams,
) -> Result<MonotonicityProbe> {
    let (lo, hi) = UMAU_ALPHA_RANGE;
    let alphas: Vec<f64> = (0..50).map(|i| lo + (hi - lo) * i as f64 / 49.0).collect();
    let rejects = alphas
        .iter()
        .map(|&a| umau_region(n, theta0, a, privacy).map(|(k, m)| (z - k).abs() >= m))
        .collect::<Result<Vec<_>>>()?;
    let monotone = rejects.windows(2).all(|w| !w[0] || w[1]);
    Ok(MonotonicityProbe {
        alphas,
        rejects,
        monotone,
    })
}
