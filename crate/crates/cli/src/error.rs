use std::fmt;

use orabe::codec::DecodeError;

/// Failures mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// A well-formed request the scheme refuses, including every ⊥ outcome.
    Domain(String),
    /// Unreadable, undecodable or inconsistent input.
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        CliError::Domain(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) | CliError::Input(m) => f.write_str(m),
        }
    }
}

impl From<DecodeError> for CliError {
    fn from(e: DecodeError) -> Self {
        CliError::Input(format!("malformed input: {e}"))
    }
}
