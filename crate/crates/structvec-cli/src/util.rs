//! Atomic output helpers: artifacts land under their final name only when
//! complete.

use std::path::{Path, PathBuf};

use structvec::{Error, Result};

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_owned());
    path.with_file_name(format!("{name}.tmp-{}", std::process::id()))
}

/// Run `write` against a temporary sibling path, then rename into place.
pub fn atomic_file<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&Path) -> Result<()>,
{
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = temp_sibling(path);
    match write(&tmp) {
        Ok(()) => {
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Run `write` against a temporary sibling directory, then swap it into
/// place (replacing any previous directory of the same name).
pub fn atomic_dir<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&Path) -> Result<()>,
{
    if path.exists() && !path.is_dir() {
        return Err(Error::Config(format!(
            "{} exists and is not a directory",
            path.display()
        )));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = temp_sibling(path);
    std::fs::create_dir_all(&tmp)?;
    match write(&tmp) {
        Ok(()) => {
            if path.exists() {
                std::fs::remove_dir_all(path)?;
            }
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = std::fs::remove_dir_all(&tmp);
            Err(e)
        }
    }
}
