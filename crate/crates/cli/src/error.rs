use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] pla_delay::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Config(_) => "config",
            Self::Model(_) => "model",
            Self::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// One entry of the error list printed on failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    /// Sweep point or stage the error belongs to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub message: String,
}

impl ErrorRecord {
    pub fn new(err: &CliError, context: Option<String>) -> Self {
        Self {
            kind: err.kind().to_string(),
            context,
            message: err.to_string(),
        }
    }
}

/// `{"errors": [...]}` on a single line.
pub fn error_list_json(errors: &[ErrorRecord]) -> String {
    #[derive(Serialize)]
    struct List<'a> {
        errors: &'a [ErrorRecord],
    }
    serde_json::to_string(&List { errors }).expect("error records serialize")
}
