use std::path::{Path, PathBuf};

/// Process exit codes. Stable; documented in the README.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const VALIDATION: u8 = 4;
    pub const FAULT_DOMINATED: u8 = 5;
    pub const VERIFICATION: u8 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("I/O error on `{}`: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    /// `message` names the field.
    #[error("{message}")]
    Validation { field: String, message: String },
    #[error("{faults} of {rows} rows in `{trace}` hit a singular flat point (more than 1%)")]
    FaultDominated { trace: String, faults: usize, rows: usize },
    #[error("{0} convergence check(s) failed")]
    Verification(usize),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Internal(_) => exit::IO,
            CliError::Parse(_) => exit::PARSE,
            CliError::Validation { .. } => exit::VALIDATION,
            CliError::FaultDominated { .. } => exit::FAULT_DOMINATED,
            CliError::Verification(_) => exit::VERIFICATION,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        let field = field.into();
        CliError::Validation {
            message: format!("invalid `{field}`: {}", reason.into()),
            field,
        }
    }
}

impl From<flatsmc_core::Error> for CliError {
    fn from(e: flatsmc_core::Error) -> Self {
        match e.field() {
            Some(field) => CliError::Validation {
                field: field.to_string(),
                message: e.to_string(),
            },
            None => CliError::Internal(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
