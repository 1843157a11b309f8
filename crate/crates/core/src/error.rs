use thiserror::Error;

/// Everything that can go wrong while building or checking a region.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WavekitError {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("complexity guard exceeded: {0}")]
    ComplexityGuard(String),
    #[error("cell is unbounded")]
    Unbounded,
    #[error("no construction found for q = 1..={q_max}: {}", .attempts.join("; "))]
    NoConstruction { q_max: u32, attempts: Vec<String> },
    #[error("unsupported matrix: {0}")]
    UnsupportedMatrix(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("mode error: {0}")]
    Mode(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dilation window is unbounded: {0}")]
    InfiniteRange(String),
    #[error("internal certificate failure: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, WavekitError>;
