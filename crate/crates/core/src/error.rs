use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositive { eigenvalue: f64 },

    #[error("density matrix has trace {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("noise strength p = {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("operation requires {expected} qubits, state has {found}")]
    WrongQubitCount { expected: usize, found: usize },

    #[error("bipartition must be a nonempty proper subset of the register")]
    TrivialBipartition,

    #[error("channel with {0} Kraus operators cannot be dilated onto a single environment qubit")]
    NotDilatable(usize),

    #[error("joint state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("single-qubit marginal {qubit} is not maximally mixed (deviation {deviation:e})")]
    MarginalNotMaximallyMixed { qubit: usize, deviation: f64 },

    #[error("tomography record is missing setting {0}")]
    IncompleteSettings(String),

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
