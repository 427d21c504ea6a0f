//! Per-layer and whole-model quantization under one of the four strategies.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QuantError, Result};
use crate::reshape::{self, ReshapeGrid};
use crate::search::{self, Method, SearchSettings};
use crate::tensor::{
    max_abs, BitWidth, Family, LayerReport, QuantParams, QuantizedTensor, Strategy, WeightTensor,
};
use crate::uniform::{self, UniformGrid};

/// Method label for strategies that do not search.
pub const FIXED_METHOD: &str = "fixed";

/// Which artifacts a run writes besides the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Emit {
    pub codes: bool,
    pub fake: bool,
    pub report: bool,
}

impl Emit {
    pub const ALL: Emit = Emit {
        codes: true,
        fake: true,
        report: true,
    };

    /// Parses a comma-separated list such as `codes,fake,report`. An empty
    /// string selects nothing.
    pub fn parse(list: &str) -> Result<Self> {
        let mut emit = Emit::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "codes" => emit.codes = true,
                "fake" => emit.fake = true,
                "report" => emit.report = true,
                other => {
                    return Err(QuantError::InvalidInput(format!(
                        "unknown emit item `{other}` (expected codes, fake, report)"
                    )))
                }
            }
        }
        Ok(emit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub bits_weights: BitWidth,
    pub strategy: Strategy,
    pub search: SearchSettings,
    /// Bit-width of the first and last tensor in model order.
    pub first_last_bits: BitWidth,
    pub emit: Emit,
}

impl PipelineConfig {
    pub fn new(bits_weights: BitWidth, strategy: Strategy) -> Self {
        Self {
            bits_weights,
            strategy,
            search: SearchSettings::default(),
            first_last_bits: BitWidth::new(bits_weights.bits().max(8)).expect("within 8..=16"),
            emit: Emit::ALL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.first_last_bits.bits() < self.bits_weights.bits() {
            return Err(QuantError::InvalidInput(format!(
                "first/last bit-width {} below weight bit-width {}",
                self.first_last_bits, self.bits_weights
            )));
        }
        self.search.validate()
    }
}

/// The loss of one tensor as a function of alpha, with `w_max` computed once.
#[derive(Debug, Clone, Copy)]
pub struct LossSurface<'a> {
    values: &'a [f64],
    w_max: f64,
    bits: BitWidth,
    family: Family,
}

impl<'a> LossSurface<'a> {
    pub fn new(tensor: &'a WeightTensor, bits: BitWidth, family: Family) -> Result<Self> {
        Ok(Self {
            values: tensor.values(),
            w_max: max_abs(tensor)?,
            bits,
            family,
        })
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn loss(&self, alpha: f64) -> f64 {
        match self.family {
            Family::Uniform => uniform::mse(self.values, self.w_max, alpha, self.bits),
            Family::Reshape => reshape::mse(self.values, self.w_max, alpha, self.bits),
        }
    }

    pub fn codes(&self, alpha: f64) -> Vec<i32> {
        match self.family {
            Family::Uniform => match UniformGrid::new(alpha, self.w_max, self.bits) {
                Some(g) => self.values.iter().map(|&w| g.quantize(w)).collect(),
                None => vec![0; self.values.len()],
            },
            Family::Reshape => match ReshapeGrid::new(alpha, self.w_max, self.bits) {
                Some(g) => self.values.iter().map(|&w| g.quantize(w)).collect(),
                None => vec![0; self.values.len()],
            },
        }
    }
}

/// Quantizes one tensor at `config.bits_weights`.
pub fn quantize_layer(
    tensor: &WeightTensor,
    config: &PipelineConfig,
) -> Result<(QuantizedTensor, LayerReport)> {
    config.validate()?;
    quantize_layer_at(tensor, config.bits_weights, config.strategy, &config.search)
}

/// Picks alpha for `strategy`, applies the alpha = 1 fallback, and encodes.
///
/// Clipped strategies never report a loss above the unclipped loss: if the
/// searched alpha does worse than alpha = 1, alpha = 1 is emitted instead.
pub fn quantize_layer_at(
    tensor: &WeightTensor,
    bits: BitWidth,
    strategy: Strategy,
    settings: &SearchSettings,
) -> Result<(QuantizedTensor, LayerReport)> {
    let surface = LossSurface::new(tensor, bits, strategy.family())?;
    let shape = tensor.shape().to_vec();

    if surface.w_max() == 0.0 {
        let params = QuantParams::degenerate(bits, strategy);
        let quantized = QuantizedTensor::new(tensor.name(), shape, vec![0; tensor.len()], params)?;
        let report = LayerReport {
            layer: tensor.name().to_string(),
            method: if strategy.searches() {
                settings.method.to_string()
            } else {
                FIXED_METHOD.to_string()
            },
            alpha: 1.0,
            loss: 0.0,
            time_ms: 0.0,
            evals: 0,
            bits: bits.bits(),
            strategy,
            degenerate: true,
        };
        return Ok((quantized, report));
    }

    let start = Instant::now();
    let (alpha, loss, method, evals) = if strategy.searches() {
        let found = search::search(|a| surface.loss(a), settings)?;
        let at_one = surface.loss(1.0);
        let (alpha, loss) = if found.loss > at_one {
            (1.0, at_one)
        } else {
            (found.alpha, found.loss)
        };
        (alpha, loss, found.method.to_string(), found.evals)
    } else {
        (1.0, surface.loss(1.0), FIXED_METHOD.to_string(), 1)
    };
    let time_ms = start.elapsed().as_secs_f64() * 1e3;

    let params = QuantParams::new(alpha, surface.w_max(), bits, strategy, loss)?;
    let quantized = QuantizedTensor::new(tensor.name(), shape, surface.codes(alpha), params)?;
    let report = LayerReport {
        layer: tensor.name().to_string(),
        method,
        alpha,
        loss,
        time_ms,
        evals,
        bits: bits.bits(),
        strategy,
        degenerate: false,
    };
    Ok((quantized, report))
}

/// Quantizes every tensor. The first and last tensors (by position) get
/// `first_last_bits`; reports come back in input order.
pub fn quantize_model(
    tensors: &[WeightTensor],
    config: &PipelineConfig,
) -> Result<(Vec<QuantizedTensor>, Vec<LayerReport>)> {
    config.validate()?;
    if tensors.is_empty() {
        return Err(QuantError::InvalidInput("model has no tensors".into()));
    }
    check_unique_names(tensors.iter().map(WeightTensor::name))?;

    let last = tensors.len() - 1;
    let results: Vec<(QuantizedTensor, LayerReport)> = tensors
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let bits = if i == 0 || i == last {
                config.first_last_bits
            } else {
                config.bits_weights
            };
            quantize_layer_at(t, bits, config.strategy, &config.search)
        })
        .collect::<Result<_>>()?;
    Ok(results.into_iter().unzip())
}

pub(crate) fn check_unique_names<'a>(names: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(QuantError::DuplicateName(name.to_string()));
        }
    }
    Ok(())
}

/// Reconstructs real values from codes with the tensor's own parameters.
pub fn dequantize_tensor(quantized: &QuantizedTensor) -> Result<WeightTensor> {
    let params = quantized.params();
    let values = quantized
        .codes()
        .iter()
        .map(|&c| match params.strategy.family() {
            Family::Uniform => uniform::dequantize(c, params),
            Family::Reshape => reshape::dequantize_reshaped(c, params),
        })
        .collect::<Result<Vec<f64>>>()?;
    WeightTensor::new(quantized.name(), quantized.shape().to_vec(), values)
}

/// Runs golden-section, bisection and Nelder-Mead on the uniform loss of one
/// tensor and returns one report per method, without the alpha = 1 fallback.
pub fn compare_searches(
    tensor: &WeightTensor,
    bits: BitWidth,
    settings: &SearchSettings,
) -> Result<Vec<LayerReport>> {
    let surface = LossSurface::new(tensor, bits, Family::Uniform)?;
    let degenerate = surface.w_max() == 0.0;
    [Method::Golden, Method::Bisection, Method::NelderMead]
        .into_iter()
        .map(|method| {
            let (alpha, loss, time_ms, evals) = if degenerate {
                (1.0, 0.0, 0.0, 0)
            } else {
                let r = search::search(|a| surface.loss(a), &settings.with_method(method))?;
                (r.alpha, r.loss, r.wall_time_ms, r.evals)
            };
            Ok(LayerReport {
                layer: tensor.name().to_string(),
                method: method.to_string(),
                alpha,
                loss,
                time_ms,
                evals,
                bits: bits.bits(),
                strategy: Strategy::UniformClip,
                degenerate,
            })
        })
        .collect()
}
