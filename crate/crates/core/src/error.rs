use thiserror::Error;

/// Errors produced by the inference routines.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A count was outside `0..=n`.
    #[error("index {index} is outside 0..={n}")]
    Index { index: u64, n: u64 },

    /// A probability vector failed validation.
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    /// Tied observations where the statistic requires distinct values.
    #[error("tied observations: {0}")]
    Ties(String),

    /// A root search failed to bracket or converge.
    #[error("{what} failed to converge: {detail}")]
    Convergence { what: &'static str, detail: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn convergence(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Convergence {
            what,
            detail: detail.into(),
        }
    }

    /// True for errors caused by invalid input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Convergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0, 1], got {value}")))
    }
}

pub(crate) fn check_open_probability(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0, 1), got {value}")))
    }
}
