use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("width {width} exceeds the configured cap {cap}")]
    WidthTooLarge { width: usize, cap: usize },

    #[error("center set is empty")]
    EmptyCenterSet,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("input list is empty")]
    EmptyInput,

    #[error("sample S_{index} is empty")]
    EmptySample { index: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("relation at coordinate {coordinate} is empty")]
    EmptyRelation { coordinate: usize },

    #[error("rank {rank} exceeds the configured cap {cap}")]
    RankTooLarge { rank: usize, cap: usize },

    #[error("epsilon {0} outside (0, 1/2]")]
    EpsilonOutOfRange(f64),

    #[error("need at least {needed} elements, have {available}")]
    InsufficientElements { needed: usize, available: usize },

    #[error("candidate budget must be positive")]
    BudgetZero,

    #[error("selected tuple at coordinate {coordinate} carries no witness")]
    MissingWitness { coordinate: usize },

    #[error("oracle limits exceeded: {0}")]
    LimitsExceeded(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("n*d = {n}*{d} overflows the 63-bit cost accumulator")]
    Overflow { n: u64, d: usize },

    #[error("stream changed between passes: {0}")]
    StreamChanged(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
