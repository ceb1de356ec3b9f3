use thiserror::Error;

/// Errors raised by the certificate pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation, or an
    /// objective/integrand produced a non-finite value.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set violates the invariants of its type.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The density table lacks a cell the assembly needs.
    #[error("density table does not cover threshold {threshold} at lambda {lambda}")]
    Coverage { threshold: f64, lambda: f64 },

    /// A request exceeds the desk-scale resource caps.
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
