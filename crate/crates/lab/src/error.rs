use std::fmt;

#[derive(Debug)]
pub enum LabError {
    /// Bad flags or flag combinations.
    Usage(String),
    Io(std::io::Error),
    /// Malformed cocycle or Jacobi file.
    Format(String),
    Core(cocycle_core::Error),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Usage(m) => write!(f, "usage: {m}"),
            LabError::Io(e) => write!(f, "io: {e}"),
            LabError::Format(m) => write!(f, "format: {m}"),
            LabError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e)
    }
}

impl From<cocycle_core::Error> for LabError {
    fn from(e: cocycle_core::Error) -> Self {
        LabError::Core(e)
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Format(e.to_string())
    }
}

pub type LabResult<T> = Result<T, LabError>;
