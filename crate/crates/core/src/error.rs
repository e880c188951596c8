use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e} > {tol:.3e})")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("degenerate beamformer: {0}")]
    DegenerateBeamformer(String),

    #[error("zero-forcing infeasible: {0}")]
    EmptyNullSpace(String),

    #[error("decomposition did not converge: {0}")]
    NoConvergence(String),
}

impl Error {
    /// True for errors caused by bad user input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidConfig { .. } | Error::Domain(_))
    }

    pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
