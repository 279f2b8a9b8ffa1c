use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("low-discrepancy stream exhausted at index {0}")]
    StreamExhausted(u64),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("sample rejected: {0}")]
    Rejected(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical consistency failure: {0}")]
    Numerical(String),
    #[error("degenerate run: {0}")]
    DegenerateRun(String),
    #[error("unknown id `{id}`; valid ids: {valid}")]
    UnknownId { id: String, valid: String },
    #[error("insufficient bins: {0}")]
    InsufficientBins(String),
}

pub type Result<T> = std::result::Result<T, Error>;
