use thiserror::Error;

/// Errors raised by the numerical and modelling routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("overflow in {func}")]
    Overflow { func: &'static str },

    #[error("{func} did not converge within {terms} terms")]
    NonConvergence { func: &'static str, terms: usize },

    #[error("precision loss in {func}: {detail}")]
    Precision { func: &'static str, detail: String },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("covariance matrix is singular or not positive definite")]
    SingularCovariance,

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("attacker covariance is not a scaled copy of the legitimate correlation matrix")]
    NonConformingCovariance,

    #[error("degenerate service process: {0}")]
    DegenerateService(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
