use thiserror::Error;

use crate::analysis::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("temperature {value} K outside validity window [{min}, {max}] K")]
    TemperatureRange { value: f64, min: f64, max: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported sequence: {0}")]
    UnsupportedSequence(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit did not converge after {iterations} iterations: {reason}")]
    NonConvergence {
        iterations: usize,
        reason: String,
        best: Box<FitResult>,
    },

    #[error("could not resolve two dips: {0}")]
    Resolution(String),

    #[error("zero contrast: bright and dark photon counts are equal")]
    ZeroContrast,

    #[error("calibration error: {0}")]
    Calibration(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
