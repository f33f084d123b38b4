use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};

/// One draw from the centred Laplace law with the given scale, as the
/// difference of two unit exponentials.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::domain(format!("Laplace scale must be positive, got {scale}")));
    }
    let a: f64 = Exp1.sample(rng);
    let b: f64 = Exp1.sample(rng);
    Ok(scale * (a - b))
}
