use thiserror::Error;

/// Errors raised by the fast-forward gas laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for the selected confinement.
    #[error("operation `{operation}` is not supported for the {model} model")]
    UnsupportedModel {
        operation: &'static str,
        model: &'static str,
    },

    /// The grid does not cover the region the eigenfunction occupies.
    #[error("grid truncates level {n}: half-width {half_width} < turning point {turning_point}")]
    Truncation {
        n: u32,
        half_width: f64,
        turning_point: f64,
    },

    /// A root finder, quadrature or linear solve failed to reach its tolerance.
    #[error("numeric failure in {context}: {detail} (residual {residual:e})")]
    Numeric {
        context: &'static str,
        detail: String,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
