use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid item {0:?}: items must be non-empty without tabs, newlines, control characters or surrounding whitespace")]
    InvalidItem(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("item {child:?} has two parents ({first:?} and {second:?})")]
    DuplicateParent {
        child: String,
        first: String,
        second: String,
    },

    #[error("taxonomy contains a cycle through {node:?}")]
    Cycle { node: String },

    #[error("item {item:?} appears in taxonomies {first:?} and {second:?}")]
    OverlappingTaxonomies {
        item: String,
        first: String,
        second: String,
    },

    #[error("transaction database is empty")]
    EmptyDatabase,

    #[error("itemset {{{itemset}}} is listed without its subset {{{missing}}}")]
    ClosureViolation { itemset: String, missing: String },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("contingency table has zero transactions")]
    EmptyTable,

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported document: {0}")]
    Document(String),

    #[error("query error: {0}")]
    Query(String),

    #[error("not available: {0}")]
    NotAvailable(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
