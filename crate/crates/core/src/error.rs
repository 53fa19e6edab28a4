use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("bad qubit index: {0}")]
    BadIndex(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid gate: {0}")]
    BadGate(String),

    #[error("gate `{name}` is not unitary (max defect {defect:e})")]
    NonUnitaryGate { name: String, defect: f64 },

    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("Schmidt decomposition failed: {0}")]
    SchmidtFailure(String),

    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("shift operator of order {0} exceeds the supported maximum of 3 copies")]
    TooLarge(usize),

    #[error("spectrum recovery is ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("negative probability {value:e} for outcome {outcome:03b}")]
    NegativeProbability { outcome: usize, value: f64 },

    #[error("missing measurement setting `{0}`")]
    MissingSetting(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
