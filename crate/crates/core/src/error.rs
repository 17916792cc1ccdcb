use thiserror::Error;

/// Crate-wide error type. The variants mirror the distinct failure classes
/// surfaced to callers: malformed input, a violated standing hypothesis
/// (primitivity, irreducibility, Pisot, coincidence), an arithmetic
/// situation the implementation cannot certify, and resource caps.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("hypothesis failure: {0}")]
    Hypothesis(String),

    #[error("unsupported field at prime {0}")]
    UnsupportedField(u64),

    #[error("cap exceeded: {0}")]
    Cap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
