use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary: |U^dag U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("Kraus operators are not trace preserving: |sum K^dag K - I| = {residual:.3e}")]
    IncompleteKraus { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("observable is not Hermitian: deviation {0:.3e}")]
    NonHermitian(f64),

    #[error("invalid qubit targets: {0}")]
    InvalidTargets(String),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("scale factor {lambda} exceeds the physical bound {max}")]
    ScaleOutOfRange { lambda: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no quasi-probability representation exists (infeasibility {residual:.3e})")]
    InfeasibleRepresentation { residual: f64 },

    #[error("representation has no negative coefficients, the negative channel is undefined")]
    DegenerateSplit,

    #[error("exact evaluation needs {terms} terms, above the limit of {limit}; use Monte Carlo sampling")]
    TooManyTerms { terms: f64, limit: f64 },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical consistency failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
