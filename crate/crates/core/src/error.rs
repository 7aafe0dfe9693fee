use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at offset {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("connective `{symbol}` at offset {pos} is not in signature {signature}")]
    UnknownConnective {
        symbol: String,
        pos: usize,
        signature: String,
    },
    #[error("variable `{0}` has no assigned value")]
    UnassignedVariable(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("{algebra} is not in class {class}: {equation} fails")]
    NotInClass {
        algebra: String,
        class: String,
        equation: String,
    },
    #[error("{0} has no lattice structure")]
    NoLattice(String),
    #[error("{what} has {size} elements, limit is {limit}")]
    TooLarge {
        what: String,
        size: usize,
        limit: usize,
    },
    #[error("empty set of matrices")]
    EmptyMatrixSet,
    #[error("unknown {0}")]
    UnknownName(String),
    #[error("rule `{0}` does not have a single conclusion")]
    NonSingletonSuccedent(String),
    #[error("missing connective `{0}`")]
    MissingConnective(String),
    #[error("malformed document: {0}")]
    Format(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
