use thiserror::Error;

/// Errors raised by operator algebra, frame, POVM and detector routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("operator is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("operator is not normal (commutator norm {commutator_norm:.3e})")]
    NotNormal { commutator_norm: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "family does not span operator space: rank {rank} of {dim} (deficiency {deficiency}, \
         least singular value {least_singular_value:.3e})"
    )]
    NotSpanning {
        rank: usize,
        dim: usize,
        deficiency: usize,
        least_singular_value: f64,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("vanishing denominator at {at} (|value| = {magnitude:.3e})")]
    VanishingDenominator { at: String, magnitude: f64 },

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no valid ancilla found for d = {d}; supply one explicitly (best min |Tr[U†νᵀ]| = {best:.3e})")]
    AncillaSearchFailed { d: usize, best: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
