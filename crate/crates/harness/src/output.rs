//! Persisting a run: one CSV per table and `summary.json`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, HarnessResult};
use crate::summary::RunSummary;

pub const SUMMARY_FILE: &str = "summary.json";

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

/// Writes every table and the summary under `dir`. With `overwrite = false` nothing is
/// written if any target already exists.
pub fn write_outputs(summary: &RunSummary, dir: &Path, overwrite: bool) -> HarnessResult<Vec<PathBuf>> {
    let mut files: Vec<(PathBuf, String)> =
        summary.tables.iter().map(|t| (dir.join(&t.file), t.render())).collect();
    let json = serde_json::to_string_pretty(summary)?;
    files.push((dir.join(SUMMARY_FILE), json + "\n"));
    if !overwrite {
        if let Some((p, _)) = files.iter().find(|(p, _)| p.exists()) {
            return Err(HarnessError::Exists(p.clone()));
        }
    }
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::with_capacity(files.len());
    for (path, text) in files {
        fs::write(&path, text).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_summary(path: &Path) -> HarnessResult<RunSummary> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    Ok(crate::summary::parse_summary(&text)?)
}
