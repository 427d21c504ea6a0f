//! Linear quantizer with a clipping fraction `alpha`.
//!
//! `s = alpha * w_max / (2^(b-1) - 1)`, `w_q = clip(round(w / s))` with
//! `clip` onto `[-2^(b-1), 2^(b-1) - 1]`, and the reconstruction is `w_q * s`.
//! Rounding is half away from zero (`f64::round`), so the quantizer is odd
//! symmetric everywhere the lower clip bound does not bind.

use crate::error::{QuantError, Result};
use crate::reduce;
use crate::tensor::{max_abs_slice, BitWidth, QuantParams, WeightTensor};

/// Step size for a given alpha, or `None` when `w_max == 0`.
pub fn scale_factor(alpha: f64, w_max: f64, bits: BitWidth) -> Option<f64> {
    debug_assert!(alpha > 0.0 && alpha <= 1.0, "alpha {alpha} outside (0, 1]");
    (w_max > 0.0).then(|| alpha * w_max / bits.q_max())
}

/// Precomputed mapping for one `(alpha, w_max, bits)` triple.
#[derive(Debug, Clone, Copy)]
pub struct UniformGrid {
    scale: f64,
    ratio: f64,
    lo: f64,
    hi: f64,
}

impl UniformGrid {
    /// `None` for a degenerate (all-zero) tensor.
    pub fn new(alpha: f64, w_max: f64, bits: BitWidth) -> Option<Self> {
        let scale = scale_factor(alpha, w_max, bits)?;
        Some(Self {
            scale,
            ratio: bits.q_max() / (alpha * w_max),
            lo: f64::from(bits.lo()),
            hi: f64::from(bits.hi()),
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline(always)]
    fn code_f64(&self, w: f64) -> f64 {
        (w * self.ratio).round().clamp(self.lo, self.hi)
    }

    #[inline]
    pub fn quantize(&self, w: f64) -> i32 {
        self.code_f64(w) as i32
    }

    #[inline]
    pub fn dequantize(&self, code: i32) -> f64 {
        f64::from(code) * self.scale
    }

    /// `dequantize(quantize(w))` without the integer round trip.
    #[inline(always)]
    pub fn reconstruct(&self, w: f64) -> f64 {
        self.code_f64(w) * self.scale
    }
}

pub fn quantize(w: f64, alpha: f64, w_max: f64, bits: BitWidth) -> i32 {
    UniformGrid::new(alpha, w_max, bits).map_or(0, |g| g.quantize(w))
}

pub fn dequantize(code: i32, params: &QuantParams) -> Result<f64> {
    let bits = params.bits;
    if !bits.contains(code) {
        return Err(QuantError::CodeOutOfRange {
            code,
            lo: bits.lo(),
            hi: bits.hi(),
        });
    }
    Ok(f64::from(code) * params.scale)
}

pub fn fake_quantize(tensor: &WeightTensor, alpha: f64, bits: BitWidth) -> WeightTensor {
    let w_max = max_abs_slice(tensor.values());
    match UniformGrid::new(alpha, w_max, bits) {
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

/// Mean squared quantization error `f(alpha, b)`. Zero for an all-zero tensor.
pub fn loss_f(tensor: &WeightTensor, alpha: f64, bits: BitWidth) -> f64 {
    mse(tensor.values(), max_abs_slice(tensor.values()), alpha, bits)
}

/// Single fused pass: quantize, dequantize, accumulate.
pub(crate) fn mse(values: &[f64], w_max: f64, alpha: f64, bits: BitWidth) -> f64 {
    match UniformGrid::new(alpha, w_max, bits) {
        None => 0.0,
        Some(grid) => reduce::mean_of(values, |w| {
            let e = w - grid.reconstruct(w);
            e * e
        }),
    }
}
