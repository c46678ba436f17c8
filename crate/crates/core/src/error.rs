use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `line` and `column` are 1-based.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("lookup error: {0}")]
    Lookup(String),

    /// A caller violated an operation's precondition.
    #[error("contract error: {0}")]
    Contract(String),

    #[error("graph derivation error: {0}")]
    Derivation(String),

    #[error("exhaustive search would evaluate {subsets} subsets (limit {limit}); use greedy_select instead")]
    GuardExceeded { subsets: u128, limit: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn json_at_line(line: usize, err: &serde_json::Error) -> Self {
        Error::Parse {
            line,
            column: err.column(),
            message: err.to_string(),
        }
    }

    pub(crate) fn json(err: &serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
