use thiserror::Error;

use crate::model::Variant;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZenoError {
    #[error("noise covariance entry {name} is not finite ({value})")]
    NonFiniteEntry { name: &'static str, value: f64 },

    #[error(
        "noise covariance is not positive semidefinite: eigenvalue {eigenvalue:e} < -{tolerance:e}"
    )]
    NotPositiveSemidefinite { eigenvalue: f64, tolerance: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{variant} closed form does not apply: {reason}")]
    VariantMismatch { variant: Variant, reason: String },

    #[error("integration step too large: dt*|L| = {product:e} > 0.1")]
    StepTooLarge { product: f64 },

    #[error("matrix exponential series did not converge after {terms} terms")]
    NonConvergent { terms: usize },

    #[error("noise covariance factorization failed at pivot {pivot} ({value:e})")]
    FactorizationFailure { pivot: usize, value: f64 },

    #[error("measurement branch with vanishing probability {probability:e} was drawn")]
    ZeroProbabilityBranch { probability: f64 },
}

pub type Result<T> = std::result::Result<T, ZenoError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ZenoError {
    ZenoError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
