use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit count {0} outside 1..=64")]
    QubitCount(u32),
    #[error("mask has bits beyond {n_qubits} qubits")]
    MaskOutOfRange { n_qubits: u32 },
    #[error("qubit {qubit} outside 1..={n_qubits}")]
    QubitIndex { qubit: u32, n_qubits: u32 },
    #[error("qubit-count mismatch: {left} vs {right}")]
    QubitMismatch { left: u32, right: u32 },
    #[error("dense matrix of {n_qubits} qubits exceeds the cap of {cap}")]
    DenseCap { n_qubits: u32, cap: u32 },

    #[error("N must be a positive even integer (at most 128), got {0}")]
    OddOrInvalidN(u32),
    #[error("Majorana index {index} outside 1..={n}")]
    MajoranaIndex { index: u32, n: u32 },
    #[error("indices {0:?} are not strictly increasing")]
    NotIncreasing([u32; 4]),

    #[error("N = {0} is below the minimum of 8 for a coupling set")]
    TooFewMajoranas(u32),
    #[error("K must be even for binary scheme (got {0})")]
    OddBinaryK(u64),
    #[error("K = {k} outside {min}..={max} (N_total = {max})")]
    KOutOfRange { k: u64, min: u64, max: u64 },
    #[error("coupling {0} is listed twice")]
    DuplicateCoupling(crate::majorana::Quartet),
    #[error("invalid coupling set: {0}")]
    InvalidCouplings(&'static str),

    #[error("terms act on different qubit counts ({0} and {1})")]
    MixedN(u32, u32),
    #[error("no Hamiltonian terms")]
    EmptyHamiltonian,
    #[error("term {0} does not commute with fermion parity")]
    ParityViolation(crate::majorana::Quartet),
    #[error("matrix dimension {dim} exceeds the cap of {cap} (about {bytes} bytes)")]
    MatrixCap { dim: usize, cap: usize, bytes: u128 },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("eigensolver failed to converge")]
    SolverFailure,

    #[error("need at least {needed} values, got {got}")]
    TooFewLevels { needed: usize, got: usize },
    #[error("input is not sorted ascending")]
    Unsorted,
    #[error("unfolding fit is not monotone inside the retained window")]
    NonMonotoneFit,
    #[error("least-squares fit failed")]
    FitFailure,
    #[error("window length {window} exceeds the spectrum span {span}")]
    WindowTooLong { window: f64, span: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("curve has no interior minimum")]
    NoDip,
    #[error("malformed reference table at line {0}")]
    ReferenceTable(usize),
}
