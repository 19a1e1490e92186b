use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad or inconsistent configuration; nothing was run.
    Config(String),
    /// A solver failed while running an experiment.
    Solver {
        context: String,
        source: microdisk::Error,
    },
    /// Output could not be written.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { .. } | CliError::Io(_) => 3,
        }
    }

    pub fn key(key: &str, message: impl fmt::Display) -> Self {
        CliError::Config(format!("`{key}`: {message}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Solver { context, source } => write!(f, "{context}: {source}"),
            CliError::Io(m) => write!(f, "output: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Attaches experiment context to solver errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for microdisk::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Solver {
            context: what(),
            source,
        })
    }
}
