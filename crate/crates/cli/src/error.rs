use std::fmt;

/// Failure of a command, split by who has to act on it.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, missing files, malformed input. Exit code 1.
    User(String),
    /// Numerical breakdown or a bug. Exit code 2.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::User(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<arraybin::Error> for CliError {
    fn from(e: arraybin::Error) -> Self {
        use arraybin::Error as E;
        match e {
            E::Singular(_) | E::NonConvergent(_) => CliError::Internal(e.to_string()),
            other => CliError::User(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn user<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::User(msg.into()))
}

/// Attaches a path to an I/O error.
pub fn io_ctx(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::User(format!("{}: {e}", path.display()))
}
