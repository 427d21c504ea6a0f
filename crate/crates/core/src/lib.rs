//! Post-training weight quantization with a searched clipping range.
//!
//! For each weight tensor the toolkit picks a clipping fraction `alpha` in
//! `(0, 1]` that minimizes the mean squared quantization error, either on a
//! linear grid or on a square-root reshaped grid, then emits integer codes,
//! fake-quantized tensors and per-layer reports.
//!
//! - [`tensor`]: value types (`WeightTensor`, `BitWidth`, `QuantParams`, ...)
//! - [`uniform`]: linear quantizer and its loss
//! - [`reshape`]: square-root quantizer and its loss
//! - [`search`]: golden-section search plus comparison baselines
//! - [`pipeline`]: per-layer and whole-model driver for the four strategies
//! - [`io`]: manifests, code files, reports
//! - [`cli`]: the `requant` command line

pub mod cli;
pub mod error;
pub mod io;
pub mod pipeline;
mod reduce;
pub mod reshape;
pub mod search;
pub mod tensor;
pub mod uniform;

pub use error::{ErrorKind, QuantError, Result};
pub use pipeline::{
    compare_searches, dequantize_tensor, quantize_layer, quantize_model, Emit, LossSurface,
    PipelineConfig,
};
pub use reshape::{dequantize_reshaped, loss_g, quantize_reshaped};
pub use search::{Method, SearchResult, SearchSettings, GOLDEN_PHI};
pub use tensor::{
    max_abs, BitWidth, Family, LayerReport, QuantParams, QuantizedTensor, Strategy, WeightTensor,
};
pub use uniform::{dequantize, fake_quantize, loss_f, quantize, scale_factor};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
