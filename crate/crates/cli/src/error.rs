use std::path::Path;

use tariffsearch_core::Error as CoreError;

/// Every failure the CLI reports, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration or input data. Exit code 2.
    #[error("{0}")]
    Config(String),
    /// A solver could not converge or bracket a root. Exit code 3.
    #[error("{0}")]
    Solve(String),
    /// Verification ran but at least one check failed. Exit code 4.
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    /// Reading or writing files. Exit code 1.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solve(_) => 3,
            CliError::VerifyFailed(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Config(_) => "config",
            CliError::Solve(_) => "solve",
            CliError::VerifyFailed(_) => "verify",
        }
    }

    /// One line, `key=value` pairs, message quoted with `"` escaped.
    pub fn machine_line(&self) -> String {
        let msg = self.to_string().replace('\\', "\\\\").replace('"', "\\\"");
        format!("error kind={} code={} message=\"{}\"", self.kind(), self.exit_code(), msg)
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SolveFailure(_) => CliError::Solve(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
