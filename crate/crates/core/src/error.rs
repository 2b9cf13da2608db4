use thiserror::Error;

/// Errors raised by state manipulation, protocol runs and fits.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symplectic (max deviation {deviation:.3e})")]
    NotSymplectic { deviation: f64 },

    #[error("noise matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NoiseNotPsd { min_eigenvalue: f64 },

    #[error("mode {0} not found in state")]
    ModeNotFound(String),

    #[error("the atom mode cannot be removed")]
    AtomModeRemoval,

    #[error("degenerate measurement: variance {0:.3e} is not positive")]
    DegenerateMeasurement(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("uncertainty relation violated at {step}: symplectic eigenvalue {nu:.6e} < bound {bound:.6e}")]
    Unphysical { step: String, nu: f64, bound: f64 },

    #[error("singular design matrix in least-squares fit")]
    SingularFit,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
