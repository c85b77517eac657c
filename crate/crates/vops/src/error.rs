//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
///
/// `Domain` marks inputs outside their mathematical domain (invalid
/// parameters, non-density matrices); `Numerical` marks procedures that ran
/// but failed to produce a trustworthy result (unconverged optimization,
/// inconsistent samplers, inadequate truncation).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
