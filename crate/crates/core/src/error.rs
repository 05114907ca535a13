use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("layout mismatch: expected {expected:?}, found {found:?}")]
    LayoutMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("point outside the support of the Lévy measure: {0}")]
    Support(String),

    #[error("component {component} is not integrable ({case})")]
    NotIntegrable { component: usize, case: String },

    #[error("component {component} is not square integrable ({case})")]
    NotSquareIntegrable { component: usize, case: String },

    #[error("quadrature did not converge: refinement gap {gap:.3e} exceeds tolerance {tolerance:.3e}")]
    Quadrature { gap: f64, tolerance: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal consistency violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
