use thiserror::Error;

use crate::tree::{Symbol, TreeMode};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("symbol `{name}` used with arity {arity} at offset {offset}, which the alphabet does not declare")]
    Arity {
        name: String,
        arity: usize,
        offset: usize,
    },

    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid symbol name `{0}`: names must be nonempty and use only [A-Za-z0-9_]")]
    InvalidName(String),

    #[error("tree `{0}` occurs more than once in the language")]
    DuplicateTree(String),

    #[error("unknown symbol {0}")]
    UnknownSymbol(Symbol),

    #[error("unknown state {0}")]
    UnknownState(usize),

    #[error("enumeration exceeded the budget of {budget} candidate trees")]
    BudgetExceeded { budget: usize },

    #[error("tree modes differ: {left:?} vs {right:?}")]
    ModeMismatch { left: TreeMode, right: TreeMode },

    #[error("alphabets are not compatible: {0}")]
    AlphabetMismatch(String),

    #[error("weight arithmetic overflowed")]
    WeightOverflow,

    #[error("algorithm `{algorithm}` is not supported here: {reason}")]
    AlgorithmUnsupported {
        algorithm: &'static str,
        reason: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid dataset configuration: {0}")]
    InvalidConfig(String),

    #[error("could not draw {wanted} distinct trees after {attempts} attempts (got {got})")]
    ExhaustedRetries {
        wanted: usize,
        got: usize,
        attempts: usize,
    },
}

impl Error {
    pub(crate) fn syntax(offset: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn at_line(self, line: usize) -> Self {
        Error::Line {
            line,
            source: Box::new(self),
        }
    }
}
