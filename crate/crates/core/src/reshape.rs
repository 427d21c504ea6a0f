//! Square-root reshaping quantizer.
//!
//! Weights are mapped to `sign(w) * sqrt(|w|)`, quantized on a linear grid whose
//! top level is `sqrt(alpha * w_max)`, and squared back on reconstruction:
//!
//! ```text
//! w_q = clip(round(sign(w) * sqrt(|w|) * (2^(b-1) - 1) / sqrt(alpha * w_max)))
//! w'  = sign(w_q) * (|w_q| * sqrt(alpha * w_max) / (2^(b-1) - 1))^2
//! ```
//!
//! Reconstruction levels are therefore spaced quadratically, finest near zero
//! where most weights sit.
//!
//! The lower clip bound is `-2^(b-1)` as in the uniform quantizer, so the most
//! negative code reconstructs to a magnitude slightly above `alpha * w_max`.
//! That asymmetry is kept as-is.

use crate::error::{QuantError, Result};
use crate::reduce;
use crate::tensor::{max_abs_slice, BitWidth, QuantParams, WeightTensor};

/// Precomputed mapping for one `(alpha, w_max, bits)` triple.
#[derive(Debug, Clone, Copy)]
pub struct ReshapeGrid {
    /// `(2^(b-1) - 1) / sqrt(alpha * w_max)`
    ratio: f64,
    /// `sqrt(alpha * w_max) / (2^(b-1) - 1)`, the step in transform space.
    root_step: f64,
    lo: f64,
    hi: f64,
}

impl ReshapeGrid {
    /// `None` for a degenerate (all-zero) tensor.
    pub fn new(alpha: f64, w_max: f64, bits: BitWidth) -> Option<Self> {
        debug_assert!(alpha > 0.0 && alpha <= 1.0, "alpha {alpha} outside (0, 1]");
        if w_max <= 0.0 {
            return None;
        }
        let root = (alpha * w_max).sqrt();
        Some(Self {
            ratio: bits.q_max() / root,
            root_step: root / bits.q_max(),
            lo: f64::from(bits.lo()),
            hi: f64::from(bits.hi()),
        })
    }

    pub fn root_step(&self) -> f64 {
        self.root_step
    }

    #[inline(always)]
    fn code_f64(&self, w: f64) -> f64 {
        let t = signum0(w) * w.abs().sqrt();
        (t * self.ratio).round().clamp(self.lo, self.hi)
    }

    #[inline(always)]
    fn level(&self, code: f64) -> f64 {
        let m = code.abs() * self.root_step;
        signum0(code) * (m * m)
    }

    #[inline]
    pub fn quantize(&self, w: f64) -> i32 {
        self.code_f64(w) as i32
    }

    #[inline]
    pub fn dequantize(&self, code: i32) -> f64 {
        self.level(f64::from(code))
    }

    #[inline(always)]
    pub fn reconstruct(&self, w: f64) -> f64 {
        self.level(self.code_f64(w))
    }
}

/// `sign` with `sign(0) = 0`.
#[inline(always)]
fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn quantize_reshaped(w: f64, alpha: f64, w_max: f64, bits: BitWidth) -> i32 {
    ReshapeGrid::new(alpha, w_max, bits).map_or(0, |g| g.quantize(w))
}

pub fn dequantize_reshaped(code: i32, params: &QuantParams) -> Result<f64> {
    let bits = params.bits;
    if !bits.contains(code) {
        return Err(QuantError::CodeOutOfRange {
            code,
            lo: bits.lo(),
            hi: bits.hi(),
        });
    }
    Ok(ReshapeGrid::new(params.alpha, params.w_max, bits).map_or(0.0, |g| g.dequantize(code)))
}

pub fn fake_quantize_reshaped(tensor: &WeightTensor, alpha: f64, bits: BitWidth) -> WeightTensor {
    let w_max = max_abs_slice(tensor.values());
    match ReshapeGrid::new(alpha, w_max, bits) {
        None => tensor.clone(),
        Some(grid) => tensor.with_values(
            tensor
                .values()
                .iter()
                .map(|&w| grid.reconstruct(w))
                .collect(),
        ),
    }
}

/// Mean squared error of the reshaped quantizer, `g(alpha, b)`.
pub fn loss_g(tensor: &WeightTensor, alpha: f64, bits: BitWidth) -> f64 {
    mse(tensor.values(), max_abs_slice(tensor.values()), alpha, bits)
}

pub(crate) fn mse(values: &[f64], w_max: f64, alpha: f64, bits: BitWidth) -> f64 {
    match ReshapeGrid::new(alpha, w_max, bits) {
        None => 0.0,
        Some(grid) => reduce::mean_of(values, |w| {
            let e = w - grid.reconstruct(w);
            e * e
        }),
    }
}
