use std::fmt;
use std::path::Path;

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations (exit 1).
    Usage(String),
    /// Unreadable or invalid input data (exit 2).
    Data(String),
    /// Linear algebra failure (exit 3).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    /// Core error raised while reading `path`. Anything wrong with the
    /// contents is a data error; parse errors get a `file:line` prefix.
    pub fn in_file(path: &Path, e: mogen_core::Error) -> Self {
        match e {
            mogen_core::Error::Parse { line, message } => {
                CliError::Data(format!("{}:{line}: {message}", path.display()))
            }
            e if e.is_numeric() => CliError::Numeric(e.to_string()),
            e => CliError::Data(format!("{}: {e}", path.display())),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<mogen_core::Error> for CliError {
    fn from(e: mogen_core::Error) -> Self {
        use mogen_core::Error as E;
        if e.is_numeric() {
            return CliError::Numeric(e.to_string());
        }
        match e {
            E::InvalidArgument(_) | E::UnsupportedMeasure { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}
