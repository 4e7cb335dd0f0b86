use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    /// A check or continuation did not pass; the report was still written.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io { path, source } => write!(f, "cannot write {}: {source}", path.display()),
            CliError::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
