//! Differentially private tests, p-values and confidence intervals for a
//! binomial proportion, built on Tulap noise.
//!
//! The data curator releases a single noisy count `Z = X + N` with
//! [`privatize`]; everything else in this crate is post-processing of `Z`.

pub mod distributions;
mod error;
pub mod fmt;
pub mod intervals;
pub mod nonparametric;
pub mod one_sided;
mod root;
pub mod simulation;
pub mod two_sided;

pub use distributions::{laplace_sample, NullKind, PmfVector, PrivacyParams, TulapParams};
pub use error::{Error, Result};
pub use one_sided::{
    calibrate_m, decide, privatize, test_vector_one_sided, ump_pvalue, verify_dp, Decision,
    DpReport, PrivateSummary, Side, TestKind, TestVector,
};

/// Library version, recorded in simulation manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
