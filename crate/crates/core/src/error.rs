use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// Every variant maps onto a stable machine-readable [`ErrorKind`] so the CLI
/// and the C ABI can report failures without string matching.
#[derive(Debug, Error)]
pub enum QuantError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bit-width {0} out of range (expected 2..=16)")]
    BitWidth(u32),

    #[error("tensor `{tensor}`: {reason}")]
    InvalidTensor { tensor: String, reason: String },

    #[error("duplicate tensor name `{0}`")]
    DuplicateName(String),

    #[error("tensor `{tensor}`: non-finite value at index {index}")]
    NonFinite { tensor: String, index: usize },

    #[error("code {code} outside [{lo}, {hi}]")]
    CodeOutOfRange { code: i32, lo: i32, hi: i32 },

    #[error("search aborted: objective returned {value} at alpha = {alpha}")]
    SearchAborted { alpha: f64, value: f64 },

    #[error("cannot read manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("tensor `{tensor}`: file {path} not found")]
    MissingFile { tensor: String, path: PathBuf },

    #[error("tensor `{tensor}`: file {path} has {actual} bytes, expected {expected}")]
    SizeMismatch {
        tensor: String,
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

/// Stable error categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidInput,
    BitWidth,
    DuplicateName,
    NonFinite,
    CodeOutOfRange,
    SearchAborted,
    Manifest,
    MissingFile,
    SizeMismatch,
    Io,
    Serialize,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::InvalidInput => "invalid_input",
            ErrorKind::BitWidth => "bit_width",
            ErrorKind::DuplicateName => "duplicate_name",
            ErrorKind::NonFinite => "non_finite",
            ErrorKind::CodeOutOfRange => "code_out_of_range",
            ErrorKind::SearchAborted => "search_aborted",
            ErrorKind::Manifest => "manifest",
            ErrorKind::MissingFile => "missing_file",
            ErrorKind::SizeMismatch => "size_mismatch",
            ErrorKind::Io => "io",
            ErrorKind::Serialize => "serialize",
        }
    }
}

impl QuantError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            QuantError::InvalidInput(_) | QuantError::InvalidTensor { .. } => {
                ErrorKind::InvalidInput
            }
            QuantError::BitWidth(_) => ErrorKind::BitWidth,
            QuantError::DuplicateName(_) => ErrorKind::DuplicateName,
            QuantError::NonFinite { .. } => ErrorKind::NonFinite,
            QuantError::CodeOutOfRange { .. } => ErrorKind::CodeOutOfRange,
            QuantError::SearchAborted { .. } => ErrorKind::SearchAborted,
            QuantError::Manifest { .. } => ErrorKind::Manifest,
            QuantError::MissingFile { .. } => ErrorKind::MissingFile,
            QuantError::SizeMismatch { .. } => ErrorKind::SizeMismatch,
            QuantError::Io { .. } => ErrorKind::Io,
            QuantError::Serialize(_) => ErrorKind::Serialize,
        }
    }

    /// Name of the tensor the error concerns, when there is one.
    pub fn tensor(&self) -> Option<&str> {
        match self {
            QuantError::InvalidTensor { tensor, .. }
            | QuantError::NonFinite { tensor, .. }
            | QuantError::MissingFile { tensor, .. }
            | QuantError::SizeMismatch { tensor, .. } => Some(tensor),
            QuantError::DuplicateName(name) => Some(name),
            _ => None,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QuantError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, QuantError>;
