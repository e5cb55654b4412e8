use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("lambda {lambda} outside the Nyquist range |lambda| <= {limit}")]
    Range { lambda: f64, limit: f64 },
    #[error("segment is not contiguous with the scattering state: {0}")]
    Contiguity(String),
    #[error("|a(lambda)| = {magnitude:e} at lambda = {lambda}: spectrum is near-singular")]
    NearSingularSpectrum { lambda: f64, magnitude: f64 },
    #[error("GLM kernel system ill-conditioned (condition estimate {0:e})")]
    Conditioning(f64),
    #[error("split-step too coarse: nonlinear phase {phase:.4} rad per step exceeds {limit}")]
    StepSize { phase: f64, limit: f64 },
    #[error("power scaling failed: {0}")]
    Scaling(String),
    #[error("framing error: {0}")]
    Framing(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
