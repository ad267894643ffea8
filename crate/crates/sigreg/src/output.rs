//! All-or-nothing file output.
//!
//! Contents are staged in memory and written to temporary files next to their
//! destinations. Nothing appears at a destination until every file is ready,
//! and files already moved into place are removed if a later move fails.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use tempfile::NamedTempFile;

use crate::error::{CliError, Result};

#[derive(Debug, Default)]
pub struct Outputs {
    staged: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stage(&mut self, path: impl Into<PathBuf>, contents: Vec<u8>) {
        self.staged.push((path.into(), contents));
    }

    pub fn is_empty(&self) -> bool {
        self.staged.is_empty()
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut temps = Vec::with_capacity(self.staged.len());
        for (path, contents) in &self.staged {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
            tmp.write_all(contents)
                .and_then(|_| tmp.flush())
                .map_err(|e| CliError::io(path, e))?;
            temps.push(tmp);
        }
        let mut done: Vec<PathBuf> = Vec::with_capacity(temps.len());
        for (tmp, (path, _)) in temps.into_iter().zip(&self.staged) {
            if let Err(e) = tmp.persist(path) {
                for p in &done {
                    let _ = fs::remove_file(p);
                }
                return Err(CliError::io(path, e.error));
            }
            done.push(path.clone());
        }
        Ok(done)
    }
}

/// Stages `value` as pretty JSON with a trailing newline.
pub fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Data(format!("JSON encoding: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}
