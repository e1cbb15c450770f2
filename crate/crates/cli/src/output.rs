//! Writing a [`Bundle`] to disk.
//!
//! Files are first written into a hidden staging directory next to their
//! destination and only moved into place once all of them exist, so a
//! failed run never leaves a partial set behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::runner::Bundle;

pub const SUMMARY_FILE: &str = "summary.json";

/// Pretty-printed summary with a trailing newline. Keys are sorted.
pub fn summary_text(bundle: &Bundle) -> String {
    let mut s = serde_json::to_string_pretty(&bundle.summary).expect("summary serializes");
    s.push('\n');
    s
}

/// Write every file of `bundle` plus `summary.json` into `dir`, creating it
/// if needed. Returns the written paths.
pub fn emit_outputs(bundle: &Bundle, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let created = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let staging = dir.join(format!(".partial-{}", std::process::id()));
    let result = stage_and_move(bundle, dir, &staging);
    let _ = fs::remove_dir_all(&staging);
    if result.is_err() && created {
        let _ = fs::remove_dir(dir);
    }
    result
}

fn stage_and_move(bundle: &Bundle, dir: &Path, staging: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir(staging).map_err(|e| CliError::io(staging, e))?;
    let summary = summary_text(bundle);
    let entries = bundle
        .files
        .iter()
        .map(|f| (f.name.as_str(), f.contents.as_str()))
        .chain(std::iter::once((SUMMARY_FILE, summary.as_str())));
    let mut names = Vec::new();
    for (name, contents) in entries {
        let path = staging.join(name);
        let mut file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        file.write_all(contents.as_bytes())
            .map_err(|e| CliError::io(&path, e))?;
        names.push(name.to_string());
    }
    let mut moved = Vec::new();
    for name in &names {
        let target = dir.join(name);
        if let Err(e) = fs::rename(staging.join(name), &target) {
            for p in &moved {
                let _ = fs::remove_file(p);
            }
            return Err(CliError::io(&target, e));
        }
        moved.push(target);
    }
    Ok(moved)
}
