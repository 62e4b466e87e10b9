use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or parameter values; exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed data; exit code 2.
    #[error("{0}")]
    Data(String),
    /// A computation failed or a validation check did not pass; exit code 3.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<gdiv::Error> for CliError {
    fn from(e: gdiv::Error) -> Self {
        use gdiv::Error as E;
        match e {
            E::InvalidParameter(_) | E::UnknownQuantity(_) => CliError::Usage(e.to_string()),
            E::InvalidData(_) | E::Parse { .. } | E::Io(_) => CliError::Data(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
