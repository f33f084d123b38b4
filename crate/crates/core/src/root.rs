//! Bracketed bisection for monotone scalar functions.
//!
//! Every calibration in the crate reduces to locating the crossing of a
//! continuous monotone function, so plain bisection is used throughout: it
//! cannot be trapped by the piecewise linear kinks of the noise cdf.

use crate::error::{Error, Result};

pub(crate) const MAX_EXPANSIONS: usize = 200;
const MAX_ITERATIONS: usize = 400;

/// Bisect on `[lo, hi]` where `pred(lo)` is false and `pred(hi)` is true.
///
/// Returns the final `(lo, hi)` pair, narrowed until the interval is below
/// `tol` or cannot be split further in floating point.
pub(crate) fn bisect_predicate<P>(mut lo: f64, mut hi: f64, tol: f64, mut pred: P) -> (f64, f64)
where
    P: FnMut(f64) -> bool,
{
    for _ in 0..MAX_ITERATIONS {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Root of a nonincreasing function `f` crossing `target`, starting from the
/// bracket `[lo, hi]` and widening it geometrically until it straddles the
/// target.
pub(crate) fn decreasing_root<F>(
    what: &'static str,
    mut f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut width = (hi - lo).max(1.0);
    let mut expansions = 0;
    while f(lo) < target {
        if expansions == MAX_EXPANSIONS {
            return Err(Error::convergence(what, format!("no lower bracket for target {target}")));
        }
        lo -= width;
        width *= 2.0;
        expansions += 1;
    }
    let mut width = (hi - lo).max(1.0);
    expansions = 0;
    while f(hi) > target {
        if expansions == MAX_EXPANSIONS {
            return Err(Error::convergence(what, format!("no upper bracket for target {target}")));
        }
        hi += width;
        width *= 2.0;
        expansions += 1;
    }
    let (lo, hi) = bisect_predicate(lo, hi, tol, |x| f(x) <= target);
    // Pick the end closer to the target; both ends are within `tol` in x.
    let (flo, fhi) = (f(lo), f(hi));
    Ok(if (flo - target).abs() <= (fhi - target).abs() { lo } else { hi })
}

/// Root of a nondecreasing function; see [`decreasing_root`].
pub(crate) fn increasing_root<F>(
    what: &'static str,
    mut f: F,
    target: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    decreasing_root(what, |x| -f(x), -target, lo, hi, tol)
}

/// Golden-section search for the maximiser of a quasi-concave function.
pub(crate) fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..MAX_ITERATIONS {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decreasing_root_expands_bracket() {
        let r = decreasing_root("t", |x| -x, -1000.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn increasing_root_finds_cube_root() {
        let r = increasing_root("t", |x| x * x * x, 2.0, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn unreachable_target_is_a_convergence_error() {
        let err = decreasing_root("t", |x| (-x).exp(), -1.0, 0.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Convergence { .. }));
    }

    #[test]
    fn golden_max_of_parabola() {
        let x = golden_max(|x| -(x - 0.3) * (x - 0.3), -5.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }
}
