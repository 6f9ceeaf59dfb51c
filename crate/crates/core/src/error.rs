use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("leading cubic coefficient is zero")]
    DegenerateCubic,

    #[error("signal estimate has zero norm")]
    ZeroSignal,

    #[error("all measurements are zero")]
    ZeroMeasurements,

    #[error("cannot reach a finite SNR target: clean {0} has zero norm")]
    ZeroCleanData(&'static str),

    #[error("expected real-valued input, found complex entries in {0}")]
    ComplexInput(&'static str),

    #[error("normal matrix is singular or ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("clean measurement {index} is {value}, must be strictly positive")]
    NonPositiveMeasurement { index: usize, value: f64 },

    #[error("solver diverged at iteration {iteration}: {reason}")]
    Diverged { iteration: usize, reason: String },

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures that originate in the numerics rather than in the
    /// caller's input. The CLI maps these to exit code 2.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroSignal
                | Error::ZeroMeasurements
                | Error::IllConditioned(_)
                | Error::Diverged { .. }
                | Error::NotConverged(_)
                | Error::NonFinite(_)
        )
    }
}
