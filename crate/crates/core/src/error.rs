use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("gamma pole at {0}")]
    Pole(f64),

    #[error("quadrature did not converge: estimate {achieved:.3e} above requested {requested:.3e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("spectral parameter outside the closed strip |Im| <= 1/2: Im = {0}")]
    OutOfStrip(f64),

    #[error("series or integral diverges: {0}")]
    Diverged(String),

    #[error("tail bound {bound:.3e} exceeds tolerance {tolerance:.3e}")]
    TailTooLarge { bound: f64, tolerance: f64 },

    #[error("division by near-zero transform value {0:.3e}")]
    DivisionUnstable(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
