use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A†| = {deviation:e}")]
    NonHermitianInput { deviation: f64 },
    #[error("eigensolver did not converge within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },
    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("site {site} out of range for {n_qubits} qubits (sites are 1-based)")]
    SiteOutOfRange { site: usize, n_qubits: usize },
    #[error("parameter vector has length {found}, expected {expected}")]
    ParamLengthMismatch { expected: usize, found: usize },
    #[error("DFT resolution insufficient: {reason}")]
    ResolutionInsufficient { reason: String },
    #[error("degenerate spectrum: {collisions} coincident level(s)")]
    DegenerateSpectrum { collisions: usize },
    #[error("objective returned a non-finite value at evaluation {evaluation}")]
    ObjectiveNonFinite { evaluation: usize },
    #[error("time horizon {horizon} is shorter than the required {required}")]
    InsufficientHorizon { horizon: f64, required: f64 },
    #[error("energy window [{lo}, {hi}] contains no eigenstate")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
