use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bitstring: {0}")]
    InvalidBits(String),

    #[error("invalid interaction graph: {0}")]
    InvalidGraph(String),

    #[error("invalid switching schedule: {0}")]
    InvalidSchedule(String),

    #[error("n = {n} exceeds the cap of {cap} qubits")]
    QubitCap { n: usize, cap: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("matrix is not Hermitian (max-entry defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid density state: {0}")]
    InvalidState(String),

    #[error("qubit index {qubit} out of range for n = {n}")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("interaction graph has no edges")]
    NoEdges,

    #[error("interaction graph is not connected")]
    Disconnected,

    #[error("Hamiltonian does not commute with all qubit permutations")]
    NonCommuting,

    #[error("no decaying window: {0}")]
    NoDecay(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
