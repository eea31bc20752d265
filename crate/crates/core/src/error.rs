use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("move not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("map is outside the generated class: {0}")]
    OutsideClass(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
