use thiserror::Error;

/// Errors produced by matrix construction, strategy selection, and indicator
/// computation.
///
/// The variants map onto the harness exit codes: `Input`, `Domain`, and
/// `Parse` are caller mistakes (exit 2), `Infeasible` marks a strategy that
/// cannot produce the requested selection and should be skipped rather than
/// aborted on (exit 3 when nothing else ran), and `Resource` guards
/// exponential computations (exit 4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("strategy infeasible: {0}")]
    Infeasible(String),

    #[error("resource guard: {0}")]
    Resource(String),

    #[error("parse error at {source_name}:{row}:{col}: {msg}")]
    Parse {
        source_name: String,
        row: usize,
        col: usize,
        msg: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}
