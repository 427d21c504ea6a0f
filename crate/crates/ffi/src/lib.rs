//! C ABI over the `requant` library.
//!
//! Objects cross the boundary as opaque handles (`RqTensor`, `RqModel`,
//! `RqLayerResult`) that the caller frees with the matching `*_free` call.
//! Every fallible function returns an [`RqStatus`]; on failure the message is
//! kept per thread and can be fetched with [`rq_last_error_message`].
//! Panics never unwind into C: they are caught and reported as
//! `RQ_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use requant::io::load_model;
use requant::pipeline::quantize_layer_at;
use requant::{
    compare_searches, dequantize_tensor, max_abs, BitWidth, ErrorKind, LayerReport, LossSurface,
    Method, QuantError, QuantizedTensor, SearchSettings, Strategy, WeightTensor,
};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    BitWidth = 3,
    DuplicateName = 4,
    NonFinite = 5,
    CodeOutOfRange = 6,
    SearchAborted = 7,
    Manifest = 8,
    MissingFile = 9,
    SizeMismatch = 10,
    Io = 11,
    Serialize = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

impl From<ErrorKind> for RqStatus {
    fn from(kind: ErrorKind) -> Self {
        match kind {
            ErrorKind::InvalidInput => RqStatus::InvalidInput,
            ErrorKind::BitWidth => RqStatus::BitWidth,
            ErrorKind::DuplicateName => RqStatus::DuplicateName,
            ErrorKind::NonFinite => RqStatus::NonFinite,
            ErrorKind::CodeOutOfRange => RqStatus::CodeOutOfRange,
            ErrorKind::SearchAborted => RqStatus::SearchAborted,
            ErrorKind::Manifest => RqStatus::Manifest,
            ErrorKind::MissingFile => RqStatus::MissingFile,
            ErrorKind::SizeMismatch => RqStatus::SizeMismatch,
            ErrorKind::Io => RqStatus::Io,
            ErrorKind::Serialize => RqStatus::Serialize,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqStrategy {
    UniformFull = 0,
    UniformClip = 1,
    ReshapeFull = 2,
    ReshapeClip = 3,
}

impl From<RqStrategy> for Strategy {
    fn from(s: RqStrategy) -> Self {
        match s {
            RqStrategy::UniformFull => Strategy::UniformFull,
            RqStrategy::UniformClip => Strategy::UniformClip,
            RqStrategy::ReshapeFull => Strategy::ReshapeFull,
            RqStrategy::ReshapeClip => Strategy::ReshapeClip,
        }
    }
}

impl From<Strategy> for RqStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::UniformFull => RqStrategy::UniformFull,
            Strategy::UniformClip => RqStrategy::UniformClip,
            Strategy::ReshapeFull => RqStrategy::ReshapeFull,
            Strategy::ReshapeClip => RqStrategy::ReshapeClip,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RqMethod {
    Golden = 0,
    Bisection = 1,
    NelderMead = 2,
    Grid = 3,
}

impl From<RqMethod> for Method {
    fn from(m: RqMethod) -> Self {
        match m {
            RqMethod::Golden => Method::Golden,
            RqMethod::Bisection => Method::Bisection,
            RqMethod::NelderMead => Method::NelderMead,
            RqMethod::Grid => Method::Grid,
        }
    }
}

impl From<Method> for RqMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Golden => RqMethod::Golden,
            Method::Bisection => RqMethod::Bisection,
            Method::NelderMead => RqMethod::NelderMead,
            Method::Grid => RqMethod::Grid,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqSearchSettings {
    pub epsilon: f64,
    pub phi: f64,
    pub alpha_min: f64,
    pub method: RqMethod,
    pub grid_points: usize,
}

impl From<RqSearchSettings> for SearchSettings {
    fn from(s: RqSearchSettings) -> Self {
        SearchSettings {
            epsilon: s.epsilon,
            phi: s.phi,
            alpha_min: s.alpha_min,
            method: s.method.into(),
            grid_points: s.grid_points,
        }
    }
}

/// Per-tensor quantization parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqParams {
    pub alpha: f64,
    pub scale: f64,
    pub w_max: f64,
    pub loss: f64,
    pub bits: u32,
    pub strategy: RqStrategy,
}

/// One report row. `method` is one of the `RqMethod` values, or -1 for the
/// fixed-alpha strategies.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqReport {
    pub alpha: f64,
    pub loss: f64,
    pub time_ms: f64,
    pub evals: u64,
    pub bits: u32,
    pub method: i32,
    pub degenerate: bool,
}

impl From<&LayerReport> for RqReport {
    fn from(r: &LayerReport) -> Self {
        let method = r
            .method
            .parse::<Method>()
            .map(|m| RqMethod::from(m) as i32)
            .unwrap_or(-1);
        RqReport {
            alpha: r.alpha,
            loss: r.loss,
            time_ms: r.time_ms,
            evals: r.evals,
            bits: r.bits,
            method,
            degenerate: r.degenerate,
        }
    }
}

/// Opaque weight tensor.
pub struct RqTensor(WeightTensor);

/// Opaque ordered list of tensors loaded from a manifest.
pub struct RqModel(Vec<WeightTensor>);

/// Opaque result of quantizing one layer.
pub struct RqLayerResult {
    quantized: QuantizedTensor,
    report: LayerReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    let c = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RqStatus, message: impl Into<String>) -> RqStatus {
    set_last_error(message);
    status
}

fn from_error(e: QuantError) -> RqStatus {
    fail(e.kind().into(), e.to_string())
}

/// Runs `f`, turning panics into `RqStatus::Panic`.
fn guard(f: impl FnOnce() -> RqStatus) -> RqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(RqStatus::Panic, msg)
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(RqStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, RqStatus> {
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RqStatus::InvalidInput, "string is not valid UTF-8"))
}

fn bit_width(bits: u32) -> Result<BitWidth, RqStatus> {
    BitWidth::new(bits).map_err(from_error)
}

unsafe fn settings_or_default(
    settings: *const RqSearchSettings,
) -> Result<SearchSettings, RqStatus> {
    let s: SearchSettings = if settings.is_null() {
        SearchSettings::default()
    } else {
        (*settings).into()
    };
    s.validate().map_err(from_error)?;
    Ok(s)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length including the NUL, or
/// 0 when there is no error recorded.
#[no_mangle]
pub unsafe extern "C" fn rq_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// The default search settings (golden-section, epsilon 1e-4, phi = (sqrt(5) - 1) / 2,
/// alpha_min 1e-3).
#[no_mangle]
pub extern "C" fn rq_search_settings_default() -> RqSearchSettings {
    let s = SearchSettings::default();
    RqSearchSettings {
        epsilon: s.epsilon,
        phi: s.phi,
        alpha_min: s.alpha_min,
        method: s.method.into(),
        grid_points: s.grid_points,
    }
}

/// Creates a tensor from `len` doubles with the given shape.
#[no_mangle]
pub unsafe extern "C" fn rq_tensor_new(
    name: *const c_char,
    shape: *const usize,
    ndim: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut RqTensor,
) -> RqStatus {
    guard(|| {
        non_null!(name, shape, values, out);
        let name = match c_str(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        let shape = std::slice::from_raw_parts(shape, ndim).to_vec();
        let values = std::slice::from_raw_parts(values, len).to_vec();
        match WeightTensor::new(name, shape, values) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(RqTensor(t)));
                RqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rq_tensor_free(tensor: *mut RqTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// Number of elements, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rq_tensor_len(tensor: *const RqTensor) -> usize {
    tensor.as_ref().map_or(0, |t| t.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn rq_max_abs(tensor: *const RqTensor, out: *mut f64) -> RqStatus {
    guard(|| {
        non_null!(tensor, out);
        match max_abs(&(*tensor).0) {
            Ok(v) => {
                *out = v;
                RqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Quantization MSE at a given alpha: the uniform loss for the uniform
/// strategies, the reshaped loss for the reshape strategies.
#[no_mangle]
pub unsafe extern "C" fn rq_loss(
    tensor: *const RqTensor,
    alpha: f64,
    bits: u32,
    strategy: RqStrategy,
    out: *mut f64,
) -> RqStatus {
    guard(|| {
        non_null!(tensor, out);
        if !(alpha > 0.0 && alpha <= 1.0) {
            return fail(
                RqStatus::InvalidInput,
                format!("alpha {alpha} outside (0, 1]"),
            );
        }
        let bits = match bit_width(bits) {
            Ok(b) => b,
            Err(s) => return s,
        };
        let family = Strategy::from(strategy).family();
        match LossSurface::new(&(*tensor).0, bits, family) {
            Ok(surface) => {
                *out = surface.loss(alpha);
                RqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Quantizes one tensor. `settings` may be null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn rq_quantize_layer(
    tensor: *const RqTensor,
    bits: u32,
    strategy: RqStrategy,
    settings: *const RqSearchSettings,
    out: *mut *mut RqLayerResult,
) -> RqStatus {
    guard(|| {
        non_null!(tensor, out);
        let bits = match bit_width(bits) {
            Ok(b) => b,
            Err(s) => return s,
        };
        let settings = match settings_or_default(settings) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match quantize_layer_at(&(*tensor).0, bits, strategy.into(), &settings) {
            Ok((quantized, report)) => {
                *out = Box::into_raw(Box::new(RqLayerResult { quantized, report }));
                RqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rq_result_free(result: *mut RqLayerResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rq_result_len(result: *const RqLayerResult) -> usize {
    result.as_ref().map_or(0, |r| r.quantized.codes().len())
}

#[no_mangle]
pub unsafe extern "C" fn rq_result_params(
    result: *const RqLayerResult,
    out: *mut RqParams,
) -> RqStatus {
    guard(|| {
        non_null!(result, out);
        let p = (*result).quantized.params();
        *out = RqParams {
            alpha: p.alpha,
            scale: p.scale,
            w_max: p.w_max,
            loss: p.loss,
            bits: p.bits.bits(),
            strategy: p.strategy.into(),
        };
        RqStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn rq_result_report(
    result: *const RqLayerResult,
    out: *mut RqReport,
) -> RqStatus {
    guard(|| {
        non_null!(result, out);
        *out = RqReport::from(&(*result).report);
        RqStatus::Ok
    })
}

/// Copies the integer codes into `buf`, which must hold `rq_result_len` values.
#[no_mangle]
pub unsafe extern "C" fn rq_result_codes(
    result: *const RqLayerResult,
    buf: *mut i32,
    len: usize,
) -> RqStatus {
    guard(|| {
        non_null!(result, buf);
        let codes = (*result).quantized.codes();
        if len < codes.len() {
            return fail(
                RqStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", codes.len()),
            );
        }
        ptr::copy_nonoverlapping(codes.as_ptr(), buf, codes.len());
        RqStatus::Ok
    })
}

/// Writes the dequantized (fake-quantized) values into `buf`.
#[no_mangle]
pub unsafe extern "C" fn rq_result_dequantize(
    result: *const RqLayerResult,
    buf: *mut f64,
    len: usize,
) -> RqStatus {
    guard(|| {
        non_null!(result, buf);
        let q = &(*result).quantized;
        if len < q.codes().len() {
            return fail(
                RqStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", q.codes().len()),
            );
        }
        match dequantize_tensor(q) {
            Ok(t) => {
                ptr::copy_nonoverlapping(t.values().as_ptr(), buf, t.len());
                RqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Runs golden-section, bisection and Nelder-Mead on the uniform loss and
/// writes three reports, in that order, into `out` (which must hold 3).
#[no_mangle]
pub unsafe extern "C" fn rq_compare_searches(
    tensor: *const RqTensor,
    bits: u32,
    settings: *const RqSearchSettings,
    out: *mut RqReport,
) -> RqStatus {
    guard(|| {
        non_null!(tensor, out);
        let bits = match bit_width(bits) {
            Ok(b) => b,
            Err(s) => return s,
        };
        let settings = match settings_or_default(settings) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match compare_searches(&(*tensor).0, bits, &settings) {
            Ok(rows) => {
                for (i, r) in rows.iter().enumerate() {
                    *out.add(i) = RqReport::from(r);
                }
                RqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Loads a model manifest.
#[no_mangle]
pub unsafe extern "C" fn rq_model_load(
    manifest_path: *const c_char,
    out: *mut *mut RqModel,
) -> RqStatus {
    guard(|| {
        non_null!(manifest_path, out);
        let path = match c_str(manifest_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match load_model(Path::new(path)) {
            Ok(tensors) => {
                *out = Box::into_raw(Box::new(RqModel(tensors)));
                RqStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn rq_model_free(model: *mut RqModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rq_model_len(model: *const RqModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.len())
}

/// Copies tensor `index` out of the model into a new handle.
#[no_mangle]
pub unsafe extern "C" fn rq_model_tensor(
    model: *const RqModel,
    index: usize,
    out: *mut *mut RqTensor,
) -> RqStatus {
    guard(|| {
        non_null!(model, out);
        let model = &(*model).0;
        match model.get(index) {
            Some(t) => {
                *out = Box::into_raw(Box::new(RqTensor(t.clone())));
                RqStatus::Ok
            }
            None => fail(
                RqStatus::InvalidInput,
                format!("index {index} out of range for {} tensors", model.len()),
            ),
        }
    })
}
