use thiserror::Error;

/// Errors raised across decomposition, circuit assembly and simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{qubits} qubits exceeds the dense oracle limit of {limit}")]
    OracleLimit { qubits: usize, limit: usize },

    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid boundary specification: {0}")]
    InvalidBoundary(String),

    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("qubit {0} used more than once by the same gate")]
    QubitCollision(usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("matrix is singular")]
    Singular,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
