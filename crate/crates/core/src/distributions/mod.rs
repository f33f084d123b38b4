//! Noise and null distributions: the Tulap family, the privacy parameters that
//! select its shape, the binomial and hypergeometric null pmfs, and a Laplace
//! sampler used by the normal-approximation baseline.

mod laplace;
mod pmf;
mod privacy;
mod tulap;

pub use laplace::laplace_sample;
pub use pmf::{NullKind, PmfVector};
pub use privacy::PrivacyParams;
pub use tulap::TulapParams;

pub(crate) use pmf::LogChoose;
pub(crate) use tulap::standard_cdf;
