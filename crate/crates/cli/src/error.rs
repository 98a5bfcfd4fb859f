use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("designs are not comparable: {0}")]
    Comparability(String),

    #[error(transparent)]
    Analysis(#[from] swarmbeam::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 for I/O failures, 2 for everything the input is to blame for.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Config { .. } => "config",
            CliError::Comparability(_) => "comparability",
            CliError::Analysis(e) => e.kind(),
        }
    }

    /// One-line machine-readable report for stderr.
    pub fn to_json(&self) -> String {
        let mut report = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Config { path, .. } => report["path"] = json!(path),
            CliError::Io { path, .. } => report["path"] = json!(path.display().to_string()),
            _ => {}
        }
        report.to_string()
    }
}
