//! Confidence intervals and confidence distributions for `theta`, obtained by
//! inverting the p-values over the null value.

use serde::{Deserialize, Serialize};

use crate::distributions::{LogChoose, PmfVector, PrivacyParams};
use crate::error::{check_open_probability, Error, Result};
use crate::root::bisect_predicate;
use crate::two_sided::{approx_pvalue_pmf, LevelSet};

/// Bisection tolerance on `theta`.
pub const THETA_TOLERANCE: f64 = 1e-10;

/// Number of equally spaced `theta` values probed before two-sided inversion.
pub const PROBE_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    LowerOneSided,
    UpperOneSided,
    Bonferroni,
    ApproxUmpu,
    Umau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub lower: f64,
    pub upper: f64,
    /// Nominal coverage `1 - alpha`.
    pub coverage: f64,
    pub kind: IntervalKind,
    pub z: f64,
    pub n: u64,
    pub privacy: PrivacyParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl IntervalResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }
}

/// Confidence distribution `H(theta) = p(theta, z)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub z: f64,
    pub n: u64,
    pub privacy: PrivacyParams,
    /// `H(0) = F(-z)`: mass the distribution leaves below zero.
    pub at_zero: f64,
    /// `H(1) = F(n - z)`.
    pub at_one: f64,
}

fn check_inputs(z: f64, alpha: f64) -> Result<()> {
    if z.is_nan() {
        return Err(Error::domain("z is NaN"));
    }
    check_open_probability("alpha", alpha)
}

/// One-sided p-values of a fixed `z` as functions of the null value. The noise
/// terms do not depend on `theta`, so they are computed once.
struct Curve {
    choose: LogChoose,
    upper_terms: Vec<f64>,
    lower_terms: Vec<f64>,
}

impl Curve {
    fn new(z: f64, n: u64, privacy: &PrivacyParams) -> Self {
        Self {
            choose: LogChoose::new(n),
            upper_terms: (0..=n).map(|x| privacy.cdf(x as f64 - z)).collect(),
            lower_terms: (0..=n).map(|x| privacy.cdf(z - x as f64)).collect(),
        }
    }

    fn pmf(&self, theta: f64) -> PmfVector {
        self.choose.binomial(theta)
    }

    /// `P(X + N >= z)` under `theta`; nondecreasing in `theta`.
    fn greater(&self, theta: f64) -> f64 {
        self.pmf(theta).dot(&self.upper_terms).clamp(0.0, 1.0)
    }

    /// `P(X + N <= z)` under `theta`; nonincreasing in `theta`.
    fn less(&self, theta: f64) -> f64 {
        self.pmf(theta).dot(&self.lower_terms).clamp(0.0, 1.0)
    }
}

fn result(
    (lower, upper): (f64, f64),
    alpha: f64,
    kind: IntervalKind,
    z: f64,
    n: u64,
    privacy: &PrivacyParams,
    warnings: Vec<String>,
) -> IntervalResult {
    IntervalResult {
        lower,
        upper,
        coverage: 1.0 - alpha,
        kind,
        z,
        n,
        privacy: *privacy,
        warnings,
    }
}

fn lower_bound(curve: &Curve, alpha: f64, warnings: &mut Vec<String>) -> f64 {
    if curve.greater(0.0) >= alpha {
        return 0.0;
    }
    if curve.greater(1.0) < alpha {
        warnings.push("no null value is accepted; the interval collapses to 1".into());
        return 1.0;
    }
    bisect_predicate(0.0, 1.0, THETA_TOLERANCE, |t| curve.greater(t) >= alpha).1
}

fn upper_bound(curve: &Curve, alpha: f64, warnings: &mut Vec<String>) -> f64 {
    if curve.less(1.0) >= alpha {
        return 1.0;
    }
    if curve.less(0.0) < alpha {
        warnings.push("no null value is accepted; the interval collapses to 0".into());
        return 0.0;
    }
    bisect_predicate(0.0, 1.0, THETA_TOLERANCE, |t| curve.less(t) < alpha).0
}

/// `[L, 1]` with `L = inf { theta0 : p(theta0, z) >= alpha }`.
pub fn ci_lower(z: f64, n: u64, alpha: f64, privacy: &PrivacyParams) -> Result<IntervalResult> {
    check_inputs(z, alpha)?;
    let mut warnings = Vec::new();
    let l = lower_bound(&Curve::new(z, n, privacy), alpha, &mut warnings);
    Ok(result((l, 1.0), alpha, IntervalKind::LowerOneSided, z, n, privacy, warnings))
}

/// `[0, U]` with `U = sup { theta0 : 1 - p(theta0, z) >= alpha }`.
pub fn ci_upper(z: f64, n: u64, alpha: f64, privacy: &PrivacyParams) -> Result<IntervalResult> {
    check_inputs(z, alpha)?;
    let mut warnings = Vec::new();
    let u = upper_bound(&Curve::new(z, n, privacy), alpha, &mut warnings);
    Ok(result((0.0, u), alpha, IntervalKind::UpperOneSided, z, n, privacy, warnings))
}

/// The two one-sided intervals at level `alpha / 2`, intersected.
pub fn ci_bonferroni(z: f64, n: u64, alpha: f64, privacy: &PrivacyParams) -> Result<IntervalResult> {
    check_inputs(z, alpha)?;
    let curve = Curve::new(z, n, privacy);
    let mut warnings = Vec::new();
    let l = lower_bound(&curve, alpha / 2.0, &mut warnings);
    let u = upper_bound(&curve, alpha / 2.0, &mut warnings);
    let bounds = if l <= u { (l, u) } else { (u, u) };
    Ok(result(bounds, alpha, IntervalKind::Bonferroni, z, n, privacy, warnings))
}

/// Inverts a two-sided p-value curve by probing a grid plus the anchor
/// `clamp(z / n)` and refining the outermost accepted points by bisection.
fn invert_two_sided<P>(pvalue: P, anchor: f64, alpha: f64, warnings: &mut Vec<String>) -> Result<(f64, f64)>
where
    P: Fn(f64) -> Result<f64>,
{
    let mut grid: Vec<f64> = (0..PROBE_POINTS)
        .map(|i| i as f64 / (PROBE_POINTS - 1) as f64)
        .collect();
    if let Err(pos) = grid.binary_search_by(|t| t.total_cmp(&anchor)) {
        grid.insert(pos, anchor);
    }
    let accepted = grid
        .iter()
        .map(|&t| pvalue(t).map(|p| p >= alpha))
        .collect::<Result<Vec<_>>>()?;
    let (Some(first), Some(last)) = (
        accepted.iter().position(|&a| a),
        accepted.iter().rposition(|&a| a),
    ) else {
        warnings.push("no probed null value is accepted; the interval collapses to z / n".into());
        return Ok((anchor, anchor));
    };
    if accepted[first..=last].iter().any(|&a| !a) {
        warnings.push("accepted null values are not contiguous; using the outermost crossings".into());
    }
    let mut failure = None;
    let mut accepts = |t: f64| match pvalue(t) {
        Ok(p) => p >= alpha,
        Err(e) => {
            failure.get_or_insert(e);
            false
        }
    };
    let lower = if first == 0 {
        grid[0]
    } else {
        bisect_predicate(grid[first - 1], grid[first], THETA_TOLERANCE, &mut accepts).1
    };
    let upper = if last == grid.len() - 1 {
        grid[last]
    } else {
        bisect_predicate(grid[last + 1], grid[last], THETA_TOLERANCE, &mut accepts).1
    };
    match failure {
        Some(e) => Err(e),
        None => Ok((lower, upper)),
    }
}

fn anchor(z: f64, n: u64) -> f64 {
    if n == 0 {
        0.5
    } else {
        (z / n as f64).clamp(0.0, 1.0)
    }
}

/// `{ theta0 : approx_pvalue(z, theta0) >= alpha }`.
pub fn ci_approx_umpu(z: f64, n: u64, alpha: f64, privacy: &PrivacyParams) -> Result<IntervalResult> {
    check_inputs(z, alpha)?;
    let choose = LogChoose::new(n);
    let pvalue = |t: f64| Ok(approx_pvalue_pmf(z, &choose.binomial(t), n as f64 * t, privacy));
    let mut warnings = Vec::new();
    let bounds = invert_two_sided(pvalue, anchor(z, n), alpha, &mut warnings)?;
    Ok(result(bounds, alpha, IntervalKind::ApproxUmpu, z, n, privacy, warnings))
}

/// `{ theta0 : umau_pvalue(z, theta0) >= alpha }`.
///
/// At `theta0` in `{0, 1}` the null is a point mass and every region is
/// trivially unbiased; the approximate p-value is used there.
pub fn ci_umau(z: f64, n: u64, alpha: f64, privacy: &PrivacyParams) -> Result<IntervalResult> {
    check_inputs(z, alpha)?;
    let choose = LogChoose::new(n);
    let pvalue = |t: f64| {
        let pmf = choose.binomial(t);
        let center = n as f64 * t;
        if t <= 0.0 || t >= 1.0 {
            Ok(approx_pvalue_pmf(z, &pmf, center, privacy))
        } else {
            LevelSet::new(&pmf, privacy, center).pvalue(z)
        }
    };
    let mut warnings = Vec::new();
    let bounds = invert_two_sided(pvalue, anchor(z, n), alpha, &mut warnings)?;
    Ok(result(bounds, alpha, IntervalKind::Umau, z, n, privacy, warnings))
}

/// `H(theta) = P_theta(X + N >= z)` on a caller-supplied increasing grid.
pub fn confidence_distribution(
    z: f64,
    n: u64,
    privacy: &PrivacyParams,
    grid: &[f64],
) -> Result<CdResult> {
    if z.is_nan() {
        return Err(Error::domain("z is NaN"));
    }
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::domain("grid values must lie in [0, 1]"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    let curve = Curve::new(z, n, privacy);
    let mut values: Vec<f64> = grid.iter().map(|&t| curve.greater(t)).collect();
    // Remove rounding-level dips so the exported values are monotone.
    for i in 1..values.len() {
        values[i] = values[i].max(values[i - 1]);
    }
    Ok(CdResult {
        grid: grid.to_vec(),
        values,
        z,
        n,
        privacy: *privacy,
        at_zero: privacy.cdf(-z),
        at_one: privacy.cdf(n as f64 - z),
    })
}

/// `H^{-1}(level)`: the smallest `theta` with `H(theta) >= level`.
pub fn cd_quantile(z: f64, n: u64, level: f64, privacy: &PrivacyParams) -> Result<f64> {
    Ok(ci_lower(z, n, level, privacy)?.lower)
}
