use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pattern must have at least one mode")]
    EmptyPattern,
    #[error("symbol {symbol} at mode {mode} is outside the {arity}-ary alphabet")]
    SymbolOutOfRange { mode: usize, symbol: u8, arity: u8 },
    #[error("cannot parse pattern from {0:?}: expected a string of 0/1 characters")]
    PatternSyntax(String),
    #[error("mode index {mode} out of range for a {modes}-mode pattern")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("pattern lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("transmissivity {0} is outside [0, 1]")]
    Transmissivity(f64),
    #[error("mean photon number {0} must be finite and non-negative")]
    MeanPhotons(f64),
    #[error("image space must contain at least one pattern")]
    EmptyImageSpace,
    #[error("image space contains duplicate pattern {0}")]
    DuplicatePattern(String),
    #[error("k-TPF requires 1 <= k <= m - 1, got m = {modes}, k = {targets}")]
    TargetCount { modes: usize, targets: usize },
    #[error("priors must be non-negative and sum to 1 (sum = {0})")]
    Priors(f64),
    #[error("prior vector has length {priors} but the ensemble has {states} states")]
    PriorLength { priors: usize, states: usize },
    #[error("Gram matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("invalid locality partition: {0}")]
    Partition(String),
    #[error("invalid target assignment: {0}")]
    Assignment(String),
    #[error("joint distribution of {rows}x{cols} cells is too large to materialise")]
    JointTooLarge { rows: usize, cols: usize },
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("m = {0} admits no block of size >= 2")]
    TooFewModes(usize),
    #[error("IDX file {path}: bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { path: String, found: u32, expected: u32 },
    #[error("IDX file {path}: truncated ({needed} bytes needed, {actual} available)")]
    Truncated { path: String, needed: usize, actual: usize },
    #[error("IDX dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("label {label} at index {index} is outside the alphabet")]
    LabelOutOfRange { index: usize, label: u8 },
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("classifier has not been fitted")]
    Unfitted,
    #[error("training set is empty or misses class {0}")]
    MissingClass(u8),
    #[error("invalid training subset size {requested} (allowed {min}..={max})")]
    SubsetSize { requested: usize, min: usize, max: usize },
    #[error("empty confusion table")]
    EmptyTable,
    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
