use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Problems found while reading the long-format CSV files. Every variant names
/// the offending line (1-based, header included).
#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("{file}: line {line}: missing columns: {detail}")]
    MissingColumns {
        file: String,
        line: u64,
        detail: String,
    },
    #[error("{file}: line {line}: unsorted rows: {detail}")]
    Unsorted {
        file: String,
        line: u64,
        detail: String,
    },
    #[error("{file}: line {line}: sample-id mismatch: {detail}")]
    IdMismatch {
        file: String,
        line: u64,
        detail: String,
    },
    #[error("{file}: line {line}: non-numeric value {value:?} in column {column:?}")]
    NonNumeric {
        file: String,
        line: u64,
        column: String,
        value: String,
    },
    #[error("{file}: line {line}: sample {id:?} has {rows} row(s), at least 2 are needed")]
    TooShort {
        file: String,
        line: u64,
        id: String,
        rows: usize,
    },
    #[error("{file}: line {line}: duplicate sample id {id:?}")]
    Duplicate { file: String, line: u64, id: String },
    #[error("{file}: line {line}: malformed CSV: {detail}")]
    Malformed {
        file: String,
        line: u64,
        detail: String,
    },
    #[error("{file}: no data rows")]
    NoData { file: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Ingest(_) => 3,
            CliError::Capacity(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<sigreg_core::Error> for CliError {
    fn from(e: sigreg_core::Error) -> Self {
        use sigreg_core::Error as E;
        match e {
            E::Capacity { .. } => CliError::Capacity(e.to_string()),
            E::InvalidConfig(_) | E::DegenerateGrid | E::TooFewForFolds { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
