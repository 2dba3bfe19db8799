use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: duplicate tet id {tet}")]
    DuplicateTet { line: usize, tet: usize },
    #[error("line {line}, column {col}: permutation {text:?} is not a bijection of 0123")]
    BadPermutation { line: usize, col: usize, text: String },
    #[error("missing line for tet {0}")]
    MissingTet(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("triangulation is invalid: {0}")]
    Invalid(String),
    #[error("unfolding needs at least two tetrahedra")]
    TooSmall,
    #[error("no attachment order yields the unique common simplex property")]
    UnfoldExhausted,
    #[error("boundary chain around edge does not close")]
    ChainOpen,
    #[error("ball move rejected: {0}")]
    BallMove(String),
    #[error("covering too large: {0}")]
    TooLarge(String),
    #[error("no branched cover with index at least {target} found up to {max_copies} copies")]
    BranchSearch { target: usize, max_copies: usize },
    #[error("two disc types forced in tet {tet}")]
    ConflictingDisc { tet: usize },
    #[error("hypothesis fails: {0}")]
    Hypothesis(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("surface is not closed: {0}")]
    NotClosed(String),
    #[error("surgery input rejected: {0}")]
    Surgery(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("out of range: {0}")]
    Range(String),
}

pub type Result<T> = std::result::Result<T, Error>;
