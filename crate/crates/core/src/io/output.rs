use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::{save_model, MANIFEST_VERSION};
use super::{file_stem, to_json_pretty, write_atomic};
use crate::error::{QuantError, Result};
use crate::tensor::{QuantParams, QuantizedTensor, WeightTensor};

/// Result manifest listing code files and parameter sidecars.
pub const RESULT_MANIFEST: &str = "quantized.json";
/// Model manifest for the fake-quantized tensors, loadable with `load_model`.
pub const FAKE_MANIFEST: &str = "fake.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputManifest {
    pub version: u32,
    pub tensors: Vec<OutputEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// `i32` little-endian, row-major.
    pub codes_file: String,
    pub params_file: String,
}

/// Writes code files, parameter sidecars and the result manifest for
/// `quantized` (skipped when empty), and the fake-quantized tensors when given.
pub fn save_quantized(
    out_dir: &Path,
    quantized: &[QuantizedTensor],
    fake: Option<&[WeightTensor]>,
) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| QuantError::io(out_dir, e))?;
    if !quantized.is_empty() {
        let mut entries = Vec::with_capacity(quantized.len());
        for (i, q) in quantized.iter().enumerate() {
            let stem = file_stem(i, q.name());
            let codes_file = format!("{stem}.codes.i32");
            let params_file = format!("{stem}.params.json");
            let bytes: Vec<u8> = q.codes().iter().flat_map(|c| c.to_le_bytes()).collect();
            write_atomic(&out_dir.join(&codes_file), &bytes)?;
            write_atomic(&out_dir.join(&params_file), &to_json_pretty(q.params())?)?;
            entries.push(OutputEntry {
                name: q.name().to_string(),
                shape: q.shape().to_vec(),
                codes_file,
                params_file,
            });
        }
        let manifest = OutputManifest {
            version: MANIFEST_VERSION,
            tensors: entries,
        };
        write_atomic(&out_dir.join(RESULT_MANIFEST), &to_json_pretty(&manifest)?)?;
    }
    if let Some(fake) = fake {
        save_model(&out_dir.join("fake"), FAKE_MANIFEST, fake)?;
    }
    Ok(())
}

/// Reads back what [`save_quantized`] wrote.
pub fn load_quantized(out_dir: &Path) -> Result<Vec<QuantizedTensor>> {
    let path = out_dir.join(RESULT_MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| QuantError::Manifest {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    let manifest: OutputManifest =
        serde_json::from_str(&text).map_err(|e| QuantError::Manifest {
            path: path.clone(),
            reason: e.to_string(),
        })?;
    manifest
        .tensors
        .iter()
        .map(|entry| {
            let params_path = out_dir.join(&entry.params_file);
            let text =
                fs::read_to_string(&params_path).map_err(|e| QuantError::io(&params_path, e))?;
            let params: QuantParams =
                serde_json::from_str(&text).map_err(|e| QuantError::Manifest {
                    path: params_path.clone(),
                    reason: e.to_string(),
                })?;
            params.validate()?;
            let codes_path = out_dir.join(&entry.codes_file);
            let bytes = fs::read(&codes_path).map_err(|e| QuantError::io(&codes_path, e))?;
            if bytes.len() % 4 != 0 {
                return Err(QuantError::SizeMismatch {
                    tensor: entry.name.clone(),
                    path: codes_path,
                    expected: (bytes.len() / 4 * 4) as u64,
                    actual: bytes.len() as u64,
                });
            }
            let codes = bytes
                .chunks_exact(4)
                .map(|b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            QuantizedTensor::new(entry.name.clone(), entry.shape.clone(), codes, params)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{dequantize_tensor, quantize_model, PipelineConfig};
    use crate::tensor::{BitWidth, Strategy};

    fn model() -> Vec<WeightTensor> {
        (0..3)
            .map(|k| {
                let values = (0..40)
                    .map(|i| ((i * (k + 3)) as f64 * 0.41).cos() * 0.2)
                    .collect();
                WeightTensor::new(format!("layer{k}.weight"), vec![5, 8], values).unwrap()
            })
            .collect()
    }

    #[test]
    fn codes_round_trip_and_dequantize_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig::new(BitWidth::new(4).unwrap(), Strategy::ReshapeClip);
        let (q, _) = quantize_model(&model(), &cfg).unwrap();
        let fake: Vec<_> = q.iter().map(|q| dequantize_tensor(q).unwrap()).collect();
        save_quantized(dir.path(), &q, Some(&fake)).unwrap();

        let back = load_quantized(dir.path()).unwrap();
        assert_eq!(back, q);
        for (b, f) in back.iter().zip(&fake) {
            assert_eq!(&dequantize_tensor(b).unwrap(), f);
        }
        let fake_back =
            crate::io::load_model(&dir.path().join("fake").join(FAKE_MANIFEST)).unwrap();
        for (fb, f) in fake_back.iter().zip(&fake) {
            let narrowed: Vec<f64> = f.values().iter().map(|&v| f64::from(v as f32)).collect();
            assert_eq!(fb.values(), narrowed.as_slice());
        }
    }

    #[test]
    fn nothing_written_for_empty_selection() {
        let dir = tempfile::tempdir().unwrap();
        save_quantized(dir.path(), &[], None).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
