use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the workbench.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("negation is not allowed in positive formulas (at {line}:{col})")]
    NegationRejected { line: usize, col: usize },

    #[error("unknown symbol `{symbol}`")]
    UnknownSymbol { symbol: String },

    #[error("symbol `{symbol}` expects {expected} argument(s), got {got}")]
    Arity {
        symbol: String,
        expected: usize,
        got: usize,
    },

    #[error("arity {got} exceeds the configured maximum of {max}")]
    ArityBound { got: usize, max: usize },

    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),

    #[error("`{0}` is a reserved word and cannot be used as a symbol")]
    ReservedWord(String),

    #[error("variable `{0}` is not assigned")]
    UnassignedVariable(String),

    #[error("structure is partial where a total structure is required")]
    PartialStructure,

    #[error("element {element} is out of range for a universe of size {size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("formula pool would exceed its budget of {cap} entries")]
    PoolBudgetExceeded { cap: usize },

    #[error(
        "raw enumeration of size-{size} structures ({count} candidates) exceeds the budget of {cap}"
    )]
    SizeBudgetExceeded { size: usize, count: u128, cap: u128 },

    #[error("the supplied map is not a homomorphism")]
    NotAHomomorphism,

    #[error("formula is not a conjunction of atoms")]
    NotConjunctive,

    #[error("span leg `{leg}` does not have the declared kind `{kind}`")]
    KindMismatch { leg: String, kind: String },

    #[error("signatures do not match: {0}")]
    SignatureMismatch(String),

    #[error("{0}")]
    Workspace(String),
}
