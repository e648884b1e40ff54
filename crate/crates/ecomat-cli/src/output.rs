//! Deterministic JSON emission and atomic artifact writes.

use std::path::{Path, PathBuf};

use ecomat::Error;
use serde_json::Value;

/// Canonical rendering: object keys sorted (the `serde_json` value map is
/// ordered), floats in shortest round-trip form. Identical inputs produce
/// byte-identical output.
pub fn to_canonical_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

pub fn sorted_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize")
}

/// Write-temp-then-rename, so a crash never leaves a half-written artifact.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Parse(format!("{}: {e}", parent.display())))?;
        }
    }
    let tmp: PathBuf = path.with_extension("tmp");
    std::fs::write(&tmp, contents).map_err(|e| Error::Parse(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(())
}
