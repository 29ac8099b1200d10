use crate::core::ItemId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown item id {0}")]
    UnknownItem(ItemId),

    #[error("unknown item label {0}")]
    UnknownLabel(u64),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: declared transaction utility {declared} but item utilities sum to {actual}")]
    TuMismatch {
        line: usize,
        declared: i64,
        actual: i64,
    },

    #[error("empty database")]
    EmptyDatabase,

    #[error("{0}")]
    InvalidArgument(String),

    #[error(
        "database has {items} distinct items, above the exhaustive-search limit of {limit}; \
         raise the limit to override"
    )]
    OracleGuard { items: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
