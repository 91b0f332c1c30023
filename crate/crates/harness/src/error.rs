use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },
    #[error("parse error at line {line}, key '{key}': {message}")]
    Parse { line: usize, key: String, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} exists; pass --overwrite to replace it")]
    Exists(PathBuf),
    #[error("summary JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(String),
    #[error("{0} cells failed")]
    CellsFailed(usize),
    #[error(transparent)]
    Core(#[from] hypspec::Error),
}

pub type HarnessResult<T> = Result<T, HarnessError>;
