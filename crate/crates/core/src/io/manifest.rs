use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{file_stem, to_json_pretty, write_atomic};
use crate::error::{QuantError, Result};
use crate::pipeline::check_unique_names;
use crate::tensor::WeightTensor;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub version: u32,
    pub tensors: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    /// Relative to the manifest's directory.
    pub file: String,
    pub byte_order: String,
}

impl ManifestEntry {
    fn f32_le(name: &str, shape: &[usize], file: String) -> Self {
        Self {
            name: name.to_string(),
            shape: shape.to_vec(),
            dtype: "f32".into(),
            file,
            byte_order: "little".into(),
        }
    }

    fn byte_len(&self) -> Option<u64> {
        self.shape
            .iter()
            .try_fold(4u64, |acc, &d| acc.checked_mul(d as u64))
    }
}

impl ModelManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let manifest_err = |reason: String| QuantError::Manifest {
            path: path.to_path_buf(),
            reason,
        };
        let text = fs::read_to_string(path).map_err(|e| manifest_err(e.to_string()))?;
        let manifest: ModelManifest =
            serde_json::from_str(&text).map_err(|e| manifest_err(e.to_string()))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(manifest_err(format!(
                "unsupported version {}",
                manifest.version
            )));
        }
        for entry in &manifest.tensors {
            if entry.dtype != "f32" || entry.byte_order != "little" {
                return Err(manifest_err(format!(
                    "tensor `{}`: unsupported dtype/byte order {}/{}",
                    entry.name, entry.dtype, entry.byte_order
                )));
            }
        }
        Ok(manifest)
    }
}

/// Loads every tensor listed in the manifest, in manifest order.
pub fn load_model(manifest_path: &Path) -> Result<Vec<WeightTensor>> {
    let manifest = ModelManifest::read(manifest_path)?;
    check_unique_names(manifest.tensors.iter().map(|t| t.name.as_str()))?;
    let base = manifest_path.parent().unwrap_or(Path::new(""));
    manifest
        .tensors
        .iter()
        .map(|entry| load_entry(base, entry))
        .collect()
}

fn load_entry(base: &Path, entry: &ManifestEntry) -> Result<WeightTensor> {
    let path = base.join(&entry.file);
    let meta = fs::metadata(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => QuantError::MissingFile {
            tensor: entry.name.clone(),
            path: path.clone(),
        },
        _ => QuantError::io(&path, e),
    })?;
    let expected = entry.byte_len().ok_or_else(|| QuantError::InvalidTensor {
        tensor: entry.name.clone(),
        reason: format!("shape {:?} overflows", entry.shape),
    })?;
    if meta.len() != expected {
        return Err(QuantError::SizeMismatch {
            tensor: entry.name.clone(),
            path,
            expected,
            actual: meta.len(),
        });
    }
    let bytes = fs::read(&path).map_err(|e| QuantError::io(&path, e))?;
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    WeightTensor::from_f32(entry.name.clone(), entry.shape.clone(), &values)
}

/// Writes tensors as `f32` little-endian files plus a manifest named
/// `manifest_name` inside `dir`. Values are narrowed to single precision.
pub fn save_model(dir: &Path, manifest_name: &str, tensors: &[WeightTensor]) -> Result<()> {
    check_unique_names(tensors.iter().map(WeightTensor::name))?;
    fs::create_dir_all(dir).map_err(|e| QuantError::io(dir, e))?;
    let mut entries = Vec::with_capacity(tensors.len());
    for (i, t) in tensors.iter().enumerate() {
        let file = format!("{}.f32", file_stem(i, t.name()));
        let bytes: Vec<u8> = t
            .values()
            .iter()
            .flat_map(|&v| (v as f32).to_le_bytes())
            .collect();
        write_atomic(&dir.join(&file), &bytes)?;
        entries.push(ManifestEntry::f32_le(t.name(), t.shape(), file));
    }
    let manifest = ModelManifest {
        version: MANIFEST_VERSION,
        tensors: entries,
    };
    write_atomic(&dir.join(manifest_name), &to_json_pretty(&manifest)?)
}
