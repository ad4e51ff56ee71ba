use std::path::Path;

/// Command failure, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid flags, unreadable paths, messages outside the group.
    #[error("parameter error: {0}")]
    Param(String),
    /// Malformed, truncated or mutually inconsistent input files.
    #[error("parse error: {0}")]
    Parse(String),
    /// Keygen, encryption, decryption or attack failed.
    #[error("{0}")]
    Crypto(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Param(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Crypto(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Param(format!("{}: {err}", path.display()))
    }
}

/// Errors raised while validating user-supplied parameters.
pub(crate) fn param(err: mor_core::Error) -> CliError {
    CliError::Param(err.to_string())
}

/// Errors raised by the protocol or the attack. Bad inputs reported by core
/// still map to a parameter error.
pub(crate) fn crypto(err: mor_core::Error) -> CliError {
    use mor_core::Error as E;
    match err {
        E::InvalidModulus(_) | E::InvalidParameter(_) | E::InvalidGroup(_) | E::GeneratorIndex { .. } => {
            CliError::Param(err.to_string())
        }
        other => CliError::Crypto(other.to_string()),
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
