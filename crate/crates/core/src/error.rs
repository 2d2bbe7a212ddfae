use std::path::PathBuf;

use thiserror::Error;

use crate::model::Family;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} out of range: allowed {allowed}, got {got}")]
    Range {
        field: &'static str,
        allowed: String,
        got: String,
    },

    #[error("operation is not defined for the {0} family")]
    UnsupportedFamily(Family),

    #[error("report does not belong to the {expected} family or has the wrong shape")]
    FamilyMismatch { expected: Family },

    #[error("input is empty")]
    EmptyInput,

    #[error("outcome space of size {size} exceeds the enumeration cap {cap}")]
    TooLarge { size: u128, cap: u128 },

    #[error("objective is not finite at x = {x} (value {value})")]
    NonFinite { x: f64, value: f64 },

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("line {line}: cannot parse `{value}`")]
    UnparsableRow { line: u64, value: String },

    #[error("no usable rows left after filtering ({rejected} rejected)")]
    EmptyAfterFiltering { rejected: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Data,
}

impl Error {
    pub(crate) fn range(field: &'static str, allowed: impl Into<String>, got: impl ToString) -> Self {
        Error::Range {
            field,
            allowed: allowed.into(),
            got: got.to_string(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::Json(_) => ErrorKind::Io,
            Error::Csv(e) if e.is_io_error() => ErrorKind::Io,
            Error::MissingColumn(_)
            | Error::UnparsableRow { .. }
            | Error::EmptyAfterFiltering { .. }
            | Error::Csv(_) => ErrorKind::Data,
            _ => ErrorKind::Config,
        }
    }
}
