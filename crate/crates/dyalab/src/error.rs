use std::fmt;

use dyalab_core::DyadicError;

/// Failures of a run, each with its process exit code.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Io(String),
    Config(String),
    Library(DyadicError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Io(_) => 1,
            RunError::Config(_) | RunError::Library(_) => 2,
        }
    }

    pub fn from_config(e: DyadicError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "usage: {m}"),
            RunError::Io(m) => write!(f, "i/o: {m}"),
            RunError::Config(m) => write!(f, "invalid config: {m}"),
            RunError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<DyadicError> for RunError {
    fn from(e: DyadicError) -> Self {
        RunError::Library(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}
