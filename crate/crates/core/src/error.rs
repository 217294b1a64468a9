use alloc::string::String;

/// Errors produced by the estimation pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration violates one of its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    /// Operand dimensions do not agree.
    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    Shape {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// The reference signal has zero energy, so an SNR cannot be set.
    #[error("signal power is zero; SNR is undefined")]
    ZeroSignal,
    /// A factorisation or decomposition failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The spatial spectrum has fewer local maxima than requested sources.
    #[error("estimation failure: found {found} of {expected} spectral peaks")]
    EstimationFailure { found: usize, expected: usize },
    /// A Fisher information block could not be inverted.
    #[error("degenerate Fisher information: {0} is singular")]
    Degenerate(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
