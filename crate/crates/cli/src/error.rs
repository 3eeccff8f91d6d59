use serde_json::json;
use thiserror::Error;

/// Failures grouped by the stage that produced them. Each group has a fixed
/// process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Ingest(#[source] ou_discount::Error),

    #[error("{0}")]
    Estimation(#[source] ou_discount::Error),

    #[error("{0}")]
    Report(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Ingest(_) => 2,
            CliError::Estimation(_) => 3,
            CliError::Report(_) => 4,
        }
    }

    /// Machine-readable payload printed on stderr for estimation failures.
    pub fn diagnostic(&self) -> serde_json::Value {
        let stage = match self {
            CliError::Usage(_) => "usage",
            CliError::Ingest(_) => "ingest",
            CliError::Estimation(_) => "estimation",
            CliError::Report(_) => "reporting",
        };
        let detail = match self {
            CliError::Ingest(e) | CliError::Estimation(e) => format!("{e:?}"),
            _ => String::new(),
        };
        json!({
            "stage": stage,
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "detail": detail,
        })
    }
}

pub fn report_err(e: impl std::fmt::Display) -> CliError {
    CliError::Report(e.to_string())
}

pub type CliResult<T> = std::result::Result<T, CliError>;
