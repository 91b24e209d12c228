use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("p = {p} divides m = {m}: the extension is ramified")]
    Ramified { p: u64, m: u64 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("inconsistent result: {0}")]
    Inconsistent(String),
    #[error("methods disagree for {label}: interpolation gives {one}, series gives {two}")]
    MethodDisagreement { label: String, one: String, two: String },
    #[error("mu-invariant appears nonzero for {0}")]
    MuNonzero(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("value is not p-integral: {0}")]
    NonIntegral(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
