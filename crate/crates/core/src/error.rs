use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QslError {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("dimension {0} exceeds the 2^8 cap")]
    DimensionTooLarge(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid qubit index set {keep:?} for {n} qubits")]
    InvalidQubitSet { keep: Vec<usize>, n: usize },
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("non-physical density matrix: {0}")]
    NonPhysical(String),
    #[error("unknown state name `{0}`")]
    UnknownState(String),
    #[error("amplitudes cannot be normalized")]
    ZeroAmplitudes,
    #[error("expectation value has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("invalid spectral model: {0}")]
    InvalidModel(String),
    #[error("quadrature needs at least {min} nodes per axis, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("analytic derivative is only available for pure-dephasing evolutions")]
    MethodMismatch,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("tomography basis group {0} recorded zero counts")]
    EmptyBasis(usize),
}

pub type Result<T> = std::result::Result<T, QslError>;
