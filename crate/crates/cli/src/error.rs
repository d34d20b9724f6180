use thiserror::Error;

/// Failure classes with their process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid data, and output that cannot be written.
    #[error("{0}")]
    Input(String),
    /// Invalid flags or config file.
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 1,
            Self::Config(_) => 2,
        }
    }

    /// Errors raised while processing data: parameter problems are config
    /// errors, everything else is attributed to the input.
    pub fn from_core(e: volret::Error) -> Self {
        use volret::Error as E;
        match e {
            E::InvalidParameter(_) | E::InvalidWindowPair { .. } | E::WindowLevelOnly => Self::Config(e.to_string()),
            other => Self::Input(other.to_string()),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::Input(format!("{}: {e}", path.display()))
    }
}
