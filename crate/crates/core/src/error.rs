use std::fmt;

use thiserror::Error;

/// Position-tagged syntax error from one of the text formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown element `{element}` of sort {sort}")]
    UnknownElement { sort: String, element: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("sort mismatch in {context}: expected {expected}, found {found}")]
    SortMismatch {
        context: String,
        expected: String,
        found: String,
    },
    #[error("arity mismatch for `{symbol}`: expected {expected} arguments, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("sort {0} has an empty domain")]
    EmptyDomain(String),
    #[error("table of `{symbol}` has no entry for ({args})")]
    Totality { symbol: String, args: String },
    #[error("algebras do not share one signature")]
    SignatureMismatch,
    #[error("algebra is not admitted: {0}")]
    NotAdmitted(String),
    #[error("grammars do not share one alphabet")]
    AlphabetMismatch,
    #[error("grammar has no start symbol")]
    MissingStart,
    #[error("grammar is not deterministic: {0}")]
    NondeterministicGrammar(String),
    #[error("resource limit: {what} would exceed the cap of {cap}")]
    ResourceLimit { what: String, cap: usize },
    #[error("formula is outside the fragment: {0}")]
    OutOfFragment(String),
    #[error("size of the height-{height} layer of {nonterminal} is unbounded")]
    UnboundedLayer { nonterminal: String, height: u64 },
    #[error("theory formula `{formula}` fails in algebra {algebra} at {witness}")]
    TheoryFails {
        formula: String,
        algebra: usize,
        witness: String,
    },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
