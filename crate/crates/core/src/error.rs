use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of the validated range: {0}")]
    OutOfRange(String),

    #[error("function is singular at z = 0")]
    SingularPoint,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not reach tolerance: estimated error {error:.3e} > requested {requested:.3e}")]
    Quadrature { error: f64, requested: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("singular matrix")]
    SingularMatrix,

    #[error("root {root} escaped the disk |kl - {center}| <= {radius:.3e}")]
    EscapedDisk {
        root: String,
        center: f64,
        radius: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
