use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("product-space dimension {dimension} exceeds the cap of {cap} states")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("operator is not Hermitian (max asymmetry {0:e})")]
    NonHermitian(f64),

    #[error("eigensolver failed on a sector of dimension {0}")]
    Eigensolver(usize),

    #[error("time grid under-resolved: {0}")]
    UnderResolved(String),

    #[error("spectrum carries no signal")]
    ZeroSignal,

    #[error("spectrum axes differ: {0} vs {1}")]
    AxisMismatch(String, String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
