use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("capacity exceeded: {what} needs N = {n_sites}, limit is {limit}")]
    Capacity {
        what: &'static str,
        n_sites: usize,
        limit: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Hamiltonian is not reflection symmetric: {0}")]
    NotReflectionSymmetric(String),

    #[error("operator does not commute with the chain reflection (residual {0:.3e})")]
    BreaksReflection(f64),

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),

    #[error("input is not sorted ascending at index {0}")]
    Unsorted(usize),

    #[error("no spacing ratios left after skipping {skipped} degenerate pairs")]
    EmptyStatistics { skipped: usize },

    #[error("only {retained} levels retained after trimming, need at least {required}")]
    TooFewLevels { retained: usize, required: usize },

    #[error("level {level} is degenerate at s = {s} (gap {gap:.3e})")]
    Degenerate { level: usize, s: f64, gap: f64 },

    #[error("T/dt = {0} is not an integer step count")]
    NonIntegerSteps(f64),

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("the zero operator has no size distribution")]
    ZeroOperator,

    #[error("need at least {required} system sizes, found {found}")]
    InsufficientSizes { required: usize, found: usize },

    #[error("cannot parse Pauli string: {0}")]
    PauliParse(String),

    /// Raised by checkpoint observers that write to disk.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
