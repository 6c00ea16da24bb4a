use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not skew-symmetric (residual {residual:e})")]
    NotSkew { residual: f64 },

    #[error("rotation block is not in SO(3) (orthogonality residual {residual:e}, det {det})")]
    InvalidRotation { residual: f64, det: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("inertia matrix is singular or not positive definite")]
    SingularInertia,

    #[error("state is missing field `{0}` required by the active system or controller")]
    MissingField(&'static str),

    #[error("desired velocity must be nonzero")]
    ZeroDesiredVelocity,

    #[error("gradient/phase point arity does not match bracket {0}")]
    ArityMismatch(&'static str),

    #[error("non-finite state produced at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("point is not an equilibrium (rhs sup-norm {residual:e})")]
    NotAnEquilibrium { residual: f64 },

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("invalid scenario at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("malformed scenario at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
