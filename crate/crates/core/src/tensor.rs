//! Value types shared by the quantizers, the search, and the pipeline.
//!
//! Everything here is immutable once constructed; constructors validate the
//! invariants so downstream code can rely on them without re-checking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QuantError, Result};

/// A named, shaped array of finite real-valued weights for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor {
    name: String,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl WeightTensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        check_shape(&name, &shape, values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(QuantError::NonFinite {
                tensor: name,
                index,
            });
        }
        Ok(Self {
            name,
            shape,
            values,
        })
    }

    /// Builds a rank-1 tensor whose shape is `[values.len()]`.
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let shape = vec![values.len()];
        Self::new(name, shape, values)
    }

    /// Widens single-precision weights to double precision.
    pub fn from_f32(name: impl Into<String>, shape: Vec<usize>, values: &[f32]) -> Result<Self> {
        Self::new(name, shape, values.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same name and shape, different values. Used by fake quantization.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            name: self.name.clone(),
            shape: self.shape.clone(),
            values,
        }
    }
}

fn check_shape(name: &str, shape: &[usize], len: usize) -> Result<()> {
    if shape.contains(&0) {
        return Err(QuantError::InvalidTensor {
            tensor: name.to_string(),
            reason: format!("shape {shape:?} has a zero dimension"),
        });
    }
    let expected = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| QuantError::InvalidTensor {
            tensor: name.to_string(),
            reason: format!("shape {shape:?} overflows"),
        })?;
    if expected != len {
        return Err(QuantError::InvalidTensor {
            tensor: name.to_string(),
            reason: format!("shape {shape:?} needs {expected} values, got {len}"),
        });
    }
    Ok(())
}

/// Largest absolute weight, `w_max`.
pub fn max_abs(tensor: &WeightTensor) -> Result<f64> {
    if tensor.is_empty() {
        return Err(QuantError::InvalidTensor {
            tensor: tensor.name.clone(),
            reason: "empty tensor".into(),
        });
    }
    Ok(max_abs_slice(&tensor.values))
}

pub(crate) fn max_abs_slice(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Number of bits per quantized value, `2..=16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct BitWidth(u32);

impl BitWidth {
    pub const MIN: u32 = 2;
    pub const MAX: u32 = 16;

    pub fn new(bits: u32) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&bits) {
            Ok(Self(bits))
        } else {
            Err(QuantError::BitWidth(bits))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Lowest code, `-2^(b-1)`.
    pub fn lo(self) -> i32 {
        -(1 << (self.0 - 1))
    }

    /// Highest code, `2^(b-1) - 1`.
    pub fn hi(self) -> i32 {
        (1 << (self.0 - 1)) - 1
    }

    /// Number of positive levels, `2^(b-1) - 1`.
    pub fn q_max(self) -> f64 {
        f64::from(self.hi())
    }

    pub fn contains(self, code: i32) -> bool {
        (self.lo()..=self.hi()).contains(&code)
    }
}

impl TryFrom<u32> for BitWidth {
    type Error = QuantError;

    fn try_from(bits: u32) -> Result<Self> {
        Self::new(bits)
    }
}

impl From<BitWidth> for u32 {
    fn from(b: BitWidth) -> u32 {
        b.0
    }
}

impl fmt::Display for BitWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which quantizer maps weights to codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Linear grid.
    Uniform,
    /// Linear grid on `sqrt(|w|)`, squared back on reconstruction.
    Reshape,
}

/// The four clip/reshape combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// No clipping, no reshaping: alpha fixed at 1.
    UniformFull,
    /// Searched alpha on the uniform loss.
    UniformClip,
    /// Reshaped quantizer at alpha = 1.
    ReshapeFull,
    /// Searched alpha on the reshaped loss.
    ReshapeClip,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::UniformFull,
        Strategy::UniformClip,
        Strategy::ReshapeFull,
        Strategy::ReshapeClip,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::UniformFull => "uniform-full",
            Strategy::UniformClip => "uniform-clip",
            Strategy::ReshapeFull => "reshape-full",
            Strategy::ReshapeClip => "reshape-clip",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Strategy::UniformFull | Strategy::UniformClip => Family::Uniform,
            Strategy::ReshapeFull | Strategy::ReshapeClip => Family::Reshape,
        }
    }

    pub fn searches(self) -> bool {
        matches!(self, Strategy::UniformClip | Strategy::ReshapeClip)
    }

    /// The fixed-alpha strategy of the same family.
    pub fn unclipped(self) -> Strategy {
        match self.family() {
            Family::Uniform => Strategy::UniformFull,
            Family::Reshape => Strategy::ReshapeFull,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = QuantError;

    /// Accepts the canonical names and the short CLI aliases
    /// `full`, `clip`, `reshape`, `requant`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-full" | "full" => Ok(Strategy::UniformFull),
            "uniform-clip" | "clip" => Ok(Strategy::UniformClip),
            "reshape-full" | "reshape" => Ok(Strategy::ReshapeFull),
            "reshape-clip" | "requant" => Ok(Strategy::ReshapeClip),
            other => Err(QuantError::InvalidInput(format!(
                "unknown strategy `{other}` (expected full, clip, reshape or requant)"
            ))),
        }
    }
}

/// Per-tensor quantization parameters. Self-contained: dequantization needs
/// nothing else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantParams {
    pub alpha: f64,
    /// `alpha * w_max / (2^(b-1) - 1)`, or 0 for an all-zero tensor.
    pub scale: f64,
    pub bits: BitWidth,
    pub strategy: Strategy,
    pub w_max: f64,
    pub loss: f64,
}

impl QuantParams {
    pub fn new(
        alpha: f64,
        w_max: f64,
        bits: BitWidth,
        strategy: Strategy,
        loss: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(QuantError::InvalidInput(format!(
                "alpha {alpha} outside (0, 1]"
            )));
        }
        if !(w_max >= 0.0 && w_max.is_finite()) {
            return Err(QuantError::InvalidInput(format!("w_max {w_max} invalid")));
        }
        if loss.is_nan() || loss < 0.0 {
            return Err(QuantError::InvalidInput(format!("loss {loss} invalid")));
        }
        let scale = if w_max > 0.0 {
            alpha * w_max / bits.q_max()
        } else {
            0.0
        };
        Ok(Self {
            alpha,
            scale,
            bits,
            strategy,
            w_max,
            loss,
        })
    }

    /// Parameters of an all-zero tensor: alpha 1, scale 0, loss 0.
    pub fn degenerate(bits: BitWidth, strategy: Strategy) -> Self {
        Self {
            alpha: 1.0,
            scale: 0.0,
            bits,
            strategy,
            w_max: 0.0,
            loss: 0.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.w_max == 0.0
    }

    /// Checks the stored fields against each other, e.g. after deserializing.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = Self::new(self.alpha, self.w_max, self.bits, self.strategy, self.loss)?;
        if rebuilt.scale.to_bits() != self.scale.to_bits() {
            return Err(QuantError::InvalidInput(format!(
                "scale {} inconsistent with alpha {} and w_max {}",
                self.scale, self.alpha, self.w_max
            )));
        }
        Ok(())
    }
}

/// Integer codes plus the parameters needed to dequantize them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTensor {
    name: String,
    shape: Vec<usize>,
    codes: Vec<i32>,
    params: QuantParams,
}

impl QuantizedTensor {
    pub fn new(
        name: impl Into<String>,
        shape: Vec<usize>,
        codes: Vec<i32>,
        params: QuantParams,
    ) -> Result<Self> {
        let name = name.into();
        check_shape(&name, &shape, codes.len())?;
        let bits = params.bits;
        if let Some(&code) = codes.iter().find(|&&c| !bits.contains(c)) {
            return Err(QuantError::CodeOutOfRange {
                code,
                lo: bits.lo(),
                hi: bits.hi(),
            });
        }
        Ok(Self {
            name,
            shape,
            codes,
            params,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn codes(&self) -> &[i32] {
        &self.codes
    }

    pub fn params(&self) -> &QuantParams {
        &self.params
    }
}

/// One row of a quantization or search-comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub layer: String,
    pub method: String,
    pub alpha: f64,
    pub loss: f64,
    pub time_ms: f64,
    pub evals: u64,
    pub bits: u32,
    pub strategy: Strategy,
    #[serde(default)]
    pub degenerate: bool,
}
