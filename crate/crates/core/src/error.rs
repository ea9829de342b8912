use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: word length {found} does not match qubit count {expected}")]
    WordLength {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: coefficient is not finite")]
    NonFiniteCoefficient { line: usize },

    #[error("qubit count mismatch: expected {expected}, found {found}")]
    QubitMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("{n_qubits} qubits exceeds the dense limit of {limit}")]
    TooManyQubits { n_qubits: usize, limit: usize },

    #[error("parameter count mismatch: expected {expected}, found {found}")]
    ParameterMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("every shot was discarded by post-selection ({shots} shots)")]
    AllShotsDiscarded { shots: u64 },

    #[error(
        "beta0 = {beta0} must exceed (E1 - E0) / (1 - eps0) = {threshold} for the bounds to hold"
    )]
    BetaBelowThreshold { beta0: f64, threshold: f64 },

    #[error("gamma doubling exceeded {cap} repeats without finding an energy below gamma")]
    RepeatCapExceeded { cap: usize },

    #[error("overlap estimator {estimator} is unavailable for this record: {reason}")]
    EstimatorUnavailable {
        estimator: &'static str,
        reason: String,
    },

    #[error("no usable runs remain for level {k}")]
    NoRunsRemaining { k: usize },
}
