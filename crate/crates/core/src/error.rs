use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("germ not populated at fine scales")]
    NotPopulated,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sequence is not strictly decreasing and positive at index {0}")]
    NonMonotone(usize),

    #[error("sequence undefined beyond index {0}")]
    SequenceExhausted(usize),

    #[error("anchors are not {lip}-Lipschitz compatible (ratio {ratio} between anchors {i} and {j})")]
    Incompatible { lip: f64, ratio: f64, i: usize, j: usize },

    #[error("coincident points in pair {0}")]
    CoincidentPair(usize),

    #[error("map collapses a direction")]
    CollapsedDirection,

    #[error("map does not fix the origin: |f(0)| = {0}")]
    OriginNotFixed(f64),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("{0}")]
    Parse(#[from] crate::expr::ParseError),
}
