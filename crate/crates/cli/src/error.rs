use std::fmt::Display;

/// CLI failure, split by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config, flags or arguments. Exit status 2.
    #[error("{0}")]
    Validation(String),
    /// Numerical or I/O failure during a run. Exit status 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn validation(key: &str, reason: impl Display) -> Self {
        CliError::Validation(format!("invalid value for `{key}`: {reason}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<irsdm_core::Error> for CliError {
    fn from(e: irsdm_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(format!("csv error: {e}"))
    }
}
