//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QdmError>;

#[derive(Debug, Error)]
pub enum QdmError {
    #[error("qubit count {0} outside supported range 1..=6")]
    InvalidQubitCount(usize),

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    InvalidQubitIndex { index: usize, n_qubits: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("value {value} outside domain {domain}")]
    DomainViolation { value: f64, domain: &'static str },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("mixed-state representation required for {0}")]
    MixedStateRequired(&'static str),

    #[error("readout matrix is not column-stochastic (column {column} sums to {sum})")]
    NonStochasticMatrix { column: usize, sum: f64 },

    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty series")]
    EmptySeries,

    #[error("observable expectation has imaginary part {0:.3e}; observable is not Hermitian")]
    NonHermitianObservable(f64),

    #[error("ill-posed fit: {0}")]
    IllPosedFit(String),

    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
