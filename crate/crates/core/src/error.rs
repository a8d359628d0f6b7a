use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian: max asymmetry {asymmetry:.3e} exceeds tolerance")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:.3e} exceeds tolerance")]
    NotSymmetric { asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter point outside model domain: {0}")]
    Domain(String),

    #[error(
        "outcome {outcome} has probability {probability:.3e} below cutoff but derivative \
         {derivative:.3e}; its Fisher-information contribution diverges"
    )]
    SingularScore { outcome: usize, probability: f64, derivative: f64 },

    #[error("Fisher information matrix is singular or ill-conditioned (condition number {condition_number:.3e})")]
    SingularFisher { condition_number: f64 },

    #[error("quantum Fisher information matrix is singular (condition number {condition_number:.3e})")]
    SingularQfi { condition_number: f64 },

    #[error("need at least two outcomes with non-negligible probability, found {kept}")]
    TooFewOutcomes { kept: usize },

    #[error("noise POVM cannot be aligned with the measurement outcomes: {0}")]
    OutcomeMismatch(String),

    #[error("truncation leakage {leakage:.3e} exceeds 1e-8; increase n_max (currently {n_max})")]
    Truncation { leakage: f64, n_max: usize },

    #[error("adaptive quadrature did not converge (estimated error {error:.3e})")]
    Quadrature { error: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
