use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported Riesz characteristic p = {0}")]
    UnsupportedCharacteristic(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("scale error: r = {r} does not fit inside radius {rho}")]
    Scale { r: f64, rho: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("memory guard: {0}")]
    MemoryGuard(String),
    #[error("p = 2 is unsupported for this operation")]
    PTwoUnsupported,
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
