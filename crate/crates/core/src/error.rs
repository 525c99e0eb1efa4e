use thiserror::Error;

/// Errors surfaced by the library.
///
/// `Config` and `Domain` indicate bad inputs (CLI exit code 2);
/// `Contract` indicates an internal consistency violation that should be
/// impossible for valid inputs (CLI exit code 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
