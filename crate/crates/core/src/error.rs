use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error("norm exponent p = {0} outside [1, 64]")]
    InvalidExponent(f64),
    #[error("truncation dimension must be at least 1")]
    EmptyVector,
    #[error("non-finite coefficient at index {index}")]
    NonFinite { index: usize },
    #[error("real-mode vector has nonzero imaginary part at index {index}")]
    ImaginaryInRealMode { index: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("norm modes differ")]
    NormMismatch,
    #[error("complexification norm needs real-mode inputs")]
    ComplexInput,
    #[error("zero vector")]
    ZeroVector,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("invalid C-type data: {0}")]
    InvalidCType(String),
    #[error("dimension {dim} is not a block boundary of the C-type data")]
    NotOnBlockBoundary { dim: usize },
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("operator dimension {expected} does not match vector dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("power {power} exceeds the iteration cap {cap}")]
    PowerTooLarge { power: u64, cap: u64 },
    #[error("images of basis vectors {first} and {second} overlap; use a general norm estimate")]
    DisjointnessViolated { first: usize, second: usize },
    #[error("operator is already complexified")]
    AlreadyComplexified,
    #[error("complexification needs a real-mode operator")]
    NotRealMode,
    #[error("direct-sum children use different norms")]
    NormMismatch,
    #[error("finite section dimension {dim} exceeds the cap {cap}")]
    SectionTooLarge { dim: usize, cap: usize },
    #[error("invalid operator description: {0}")]
    Schema(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("initial vector is zero")]
    ZeroVector,
    #[error("scan length {n} exceeds the iteration cap {cap}")]
    ScanTooLong { n: u64, cap: u64 },
    #[error("block {block} not stored (only {stored} blocks)")]
    BlockNotStored { block: usize, stored: usize },
    #[error("period lcm overflows 128-bit arithmetic; use a smaller support")]
    PeriodOverflow,
    #[error("empty block support")]
    EmptySupport,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubspaceError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("subspace chain has {have} members, {need} requested")]
    ChainTooShallow { have: usize, need: usize },
    #[error("subspace chain is not non-increasing at position {at}")]
    ChainNotNested { at: usize },
    #[error("null space empty at truncation for step {step}")]
    NullSpaceEmpty { step: usize },
    #[error("generators are linearly dependent (rank {rank} < {count})")]
    RankDeficient { rank: usize, count: usize },
    #[error("dense-family oracle cannot approximate within {delta:e} (best {best:e})")]
    OracleCannotMeet { delta: f64, best: f64 },
    #[error("no admissible power in the supplied sequence after {after} for step {step}")]
    NoAdmissiblePower { step: usize, after: u64 },
    #[error("bound ({condition}) violated at j={j}, n={n}: {value:e} >= {bound:e}")]
    BoundViolated { condition: &'static str, j: usize, n: usize, value: f64, bound: f64 },
    #[error("perturbation sum {0} is not below 1/2; certificate refused")]
    PerturbationTooLarge(f64),
    #[error("M = {m} is below sup|w_j| = {sup}")]
    BoundBelowSupWeight { m: f64, sup: f64 },
    #[error(
        "no admissible block for n={n} (k={k}) within truncation: need block length >= {required_len} \
         and log2 block product >= {required_log2_product:.3}"
    )]
    NotFoundWithinTruncation { n: usize, k: u64, required_len: u64, required_log2_product: f64 },
    #[error("e-basis has {have} vectors, {need} steps requested")]
    BasisTooShort { have: usize, need: usize },
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("no analytic essential-spectrum formula for this operator class: {0}")]
    UnsupportedClass(String),
    #[error("gate needs an analytic descriptor")]
    UnknownAnalytic,
    #[error("|lambda| = {0} is off the unit circle")]
    OffCircle(f64),
    #[error("matrix must be square and nonempty ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("smallest singular value did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("grid of {points} points exceeds the cap {cap}")]
    GridTooLarge { points: usize, cap: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("{requested} blocks requested, only {stored} stored")]
    BlocksNotStored { requested: usize, stored: usize },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("operator: {0}")]
    Operator(#[from] OperatorError),
    #[error("dynamics: {0}")]
    Dynamics(#[from] DynamicsError),
    #[error("subspace: {0}")]
    Subspace(#[from] SubspaceError),
    #[error("spectra: {0}")]
    Spectra(#[from] SpectraError),
    #[error("sequence space: {0}")]
    Seq(#[from] SeqError),
    #[error("serialization: {0}")]
    Serialize(String),
}
