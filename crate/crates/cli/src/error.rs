use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Compute(#[from] cdgreen::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Compute(cdgreen::Error::SingularPoint { .. }) => "singular_point",
            CliError::Compute(cdgreen::Error::BudgetExceeded { .. }) => "budget_exceeded",
            CliError::Compute(_) => "compute",
        }
    }

    /// Process exit code; 1 is reserved for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Compute(_) => 4,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            CliError::Io { path, .. } => body["path"] = json!(path.display().to_string()),
            CliError::Compute(cdgreen::Error::SingularPoint { x, y }) => body["point"] = json!([x, y]),
            CliError::Compute(cdgreen::Error::BudgetExceeded { cells, estimate, error }) => {
                body["cells"] = json!(cells);
                body["estimate"] = json!(estimate);
                body["error_estimate"] = json!(error);
            }
            _ => {}
        }
        json!({ "error": body })
    }
}
