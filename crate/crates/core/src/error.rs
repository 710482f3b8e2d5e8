use thiserror::Error;

/// Errors raised across the provisioning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("invalid slice specification: {0}")]
    Spec(String),

    #[error("covariance matrix is not positive semidefinite (pivot {pivot} = {value:e})")]
    NotPsd { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("robustness margin unreachable: required PSP {required} not met at gamma = {gamma_cap}")]
    Unreachable { required: f64, gamma_cap: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("solution rejected: {0}")]
    Solution(String),

    #[error("LP format parse error at line {line}: {msg}")]
    LpParse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
