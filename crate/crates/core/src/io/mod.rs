//! On-disk formats.
//!
//! * Model manifest: JSON listing tensors, each stored as a headerless
//!   row-major little-endian `f32` file next to the manifest.
//! * Quantized output: `int32` little-endian code files, a JSON parameter
//!   sidecar per tensor, and a result manifest tying them together.
//! * Report: canonical JSON (sorted keys) or CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{QuantError, Result};

mod manifest;
mod output;
pub(crate) mod report;

pub use manifest::{load_model, save_model, ManifestEntry, ModelManifest, MANIFEST_VERSION};
pub use output::{
    load_quantized, save_quantized, OutputEntry, OutputManifest, FAKE_MANIFEST, RESULT_MANIFEST,
};
pub use report::{
    read_report, round_ms, write_report, ConfigEcho, QuantReportDocument, ReportFormat, ReportRow,
    SearchRow, Totals, REPORT_FILE,
};

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// then renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| QuantError::InvalidInput(format!("{} has no file name", path.display())))?;
    let tmp: PathBuf = dir.join(format!(
        ".{}.tmp-{}",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        QuantError::io(path, e)
    })
}

/// Turns a tensor name into a file stem; the index keeps stems unique.
pub(crate) fn file_stem(index: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{index:04}_{clean}")
}

pub(crate) fn to_json_pretty<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    // Going through `Value` sorts object keys.
    let value = serde_json::to_value(value).map_err(|e| QuantError::Serialize(e.to_string()))?;
    let mut out =
        serde_json::to_vec_pretty(&value).map_err(|e| QuantError::Serialize(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}
