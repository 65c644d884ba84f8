use thiserror::Error;

/// Failures raised by the numerical routines.
///
/// `Domain` and `IndexOutOfRange` are caller errors (bad input); `TermCap` and
/// `DivisorUnderflow` mean the numerics gave up on otherwise valid input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("index {index} out of range for grid of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("series did not converge within {cap} terms (lambda = {lambda}, t = {t})")]
    TermCap { cap: usize, lambda: f64, t: f64 },

    #[error("per-step divisor {divisor:e} fell below threshold at step {step}")]
    DivisorUnderflow { step: usize, divisor: f64 },
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::TermCap { .. } | Error::DivisorUnderflow { .. })
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
