use std::fmt;
use std::io;
use std::path::Path;

/// A failure carrying the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Config(_) => 3,
            Self::Io(_) => 4,
        }
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        Self::Io(format!("{}: {err}", path.display()))
    }

    /// Maps a library error raised while validating command-line values.
    pub fn from_args(err: chaos_bandit::Error) -> Self {
        match err {
            chaos_bandit::Error::InvalidArgument(msg) => Self::Usage(msg),
            other => other.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Config(m) | Self::Io(m) => f.write_str(m),
        }
    }
}

impl From<chaos_bandit::Error> for CliError {
    fn from(err: chaos_bandit::Error) -> Self {
        use chaos_bandit::Error;
        match err {
            Error::Io { .. } => Self::Io(err.to_string()),
            Error::Parse { .. }
            | Error::EmptyTrace(_)
            | Error::Config(_)
            | Error::InvalidArgument(_) => Self::Config(err.to_string()),
        }
    }
}
