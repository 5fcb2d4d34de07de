use thiserror::Error;

/// Errors raised across the signal chain, simulators and storage layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("frequency {freq} Hz is outside the band [{low}, {high}] Hz")]
    OutOfBand { freq: f64, low: f64, high: f64 },

    #[error("alignment failed: {0}")]
    Alignment(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("degenerate fit: {0}")]
    Fit(String),

    #[error("value out of encodable range: {0}")]
    Encoding(String),

    #[error("CRC mismatch in chunk with sequence {sequence}")]
    Integrity { sequence: u32 },

    #[error("malformed frame: {0}")]
    Framing(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
