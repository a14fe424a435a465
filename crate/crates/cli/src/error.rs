use std::fmt;
use std::io;

use boxdeconv::imaging2d::TvError;
use boxdeconv::recovery::RecoveryError;

/// Everything a subcommand can fail with. Each variant maps to a process
/// exit code and a short reason tag printed as `error[tag]: message`.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Dimension(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) | CliError::Parse(_) | CliError::Dimension(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Dimension(_) => "dimension",
            CliError::Infeasible(_) => "infeasible",
            CliError::Solver(_) => "solver",
            CliError::Io { .. } => "io",
        }
    }

    pub fn io(path: impl fmt::Display, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// The one-line report written to stderr.
    pub fn report_line(&self) -> String {
        let msg = self.to_string().replace('\n', " ");
        format!("error[{}]: {}", self.tag(), msg.trim())
    }
}

impl From<boxdeconv::Error> for CliError {
    fn from(e: boxdeconv::Error) -> Self {
        match e {
            boxdeconv::Error::Dimension(msg) => CliError::Dimension(msg),
            boxdeconv::Error::Capacity { .. } => CliError::Dimension(e.to_string()),
            boxdeconv::Error::InvalidInput(msg) => CliError::Usage(msg),
            boxdeconv::Error::Precondition(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<RecoveryError> for CliError {
    fn from(e: RecoveryError) -> Self {
        match e {
            RecoveryError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            RecoveryError::Solver { .. } => CliError::Solver(e.to_string()),
            RecoveryError::Input(inner) => inner.into(),
        }
    }
}

impl From<TvError> for CliError {
    fn from(e: TvError) -> Self {
        match e {
            TvError::Input(inner) => inner.into(),
            TvError::NonFinite { .. } => CliError::Solver(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
