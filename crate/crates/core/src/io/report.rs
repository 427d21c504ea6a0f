use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::to_json_pretty;
use crate::error::{QuantError, Result};
use crate::pipeline::PipelineConfig;
use crate::search::Method;
use crate::tensor::{LayerReport, Strategy};

pub const REPORT_FILE: &str = "report.json";

/// Milliseconds rounded to two decimals.
pub fn round_ms(ms: f64) -> f64 {
    (ms * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = QuantError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(QuantError::InvalidInput(format!(
                "unknown report format `{other}` (expected json or csv)"
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

/// One CSV/JSON report row. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub layer: String,
    pub method: String,
    pub alpha: f64,
    pub loss: f64,
    pub time_ms: f64,
    pub evals: u64,
    pub bits: u32,
    pub strategy: Strategy,
}

impl From<&LayerReport> for ReportRow {
    fn from(r: &LayerReport) -> Self {
        Self {
            layer: r.layer.clone(),
            method: r.method.clone(),
            alpha: r.alpha,
            loss: r.loss,
            time_ms: round_ms(r.time_ms),
            evals: r.evals,
            bits: r.bits,
            strategy: r.strategy,
        }
    }
}

/// Search-comparison row: layer, method, alpha, loss, time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRow {
    pub layer: String,
    pub method: String,
    pub alpha: f64,
    pub loss: f64,
    pub time_ms: f64,
}

impl From<&LayerReport> for SearchRow {
    fn from(r: &LayerReport) -> Self {
        Self {
            layer: r.layer.clone(),
            method: r.method.clone(),
            alpha: r.alpha,
            loss: r.loss,
            time_ms: round_ms(r.time_ms),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub bits: u32,
    pub first_last_bits: u32,
    pub strategy: Strategy,
    pub method: Method,
    pub epsilon: f64,
    pub phi: f64,
    pub alpha_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub loss_sum: f64,
    pub time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantReportDocument {
    pub tool_version: String,
    pub config: ConfigEcho,
    pub rows: Vec<ReportRow>,
    pub totals: Totals,
}

impl QuantReportDocument {
    pub fn new(config: &PipelineConfig, reports: &[LayerReport]) -> Self {
        let rows: Vec<ReportRow> = reports.iter().map(ReportRow::from).collect();
        let totals = Totals {
            loss_sum: reports.iter().map(|r| r.loss).sum(),
            time_ms: round_ms(reports.iter().map(|r| r.time_ms).sum()),
        };
        Self {
            tool_version: crate::VERSION.to_string(),
            config: ConfigEcho {
                bits: config.bits_weights.bits(),
                first_last_bits: config.first_last_bits.bits(),
                strategy: config.strategy,
                method: config.search.method,
                epsilon: config.search.epsilon,
                phi: config.search.phi,
                alpha_min: config.search.alpha_min,
            },
            rows,
            totals,
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        to_json_pretty(self)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        rows_to_csv(&self.rows)
    }
}

pub(crate) fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| QuantError::Serialize(e.to_string()))?;
    }
    w.into_inner()
        .map_err(|e| QuantError::Serialize(e.to_string()))
}

/// Writes the document in the requested format.
pub fn write_report(
    doc: &QuantReportDocument,
    format: ReportFormat,
    out: &mut dyn Write,
) -> Result<()> {
    let bytes = match format {
        ReportFormat::Json => doc.to_json()?,
        ReportFormat::Csv => doc.to_csv()?,
    };
    out.write_all(&bytes)
        .map_err(|e| QuantError::io("<output>", e))
}

/// Reads a JSON report document from a file, or from `report.json` inside a
/// directory.
pub fn read_report(path: &Path) -> Result<QuantReportDocument> {
    let path = if path.is_dir() {
        path.join(REPORT_FILE)
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&path).map_err(|e| QuantError::Manifest {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| QuantError::Manifest {
        path,
        reason: e.to_string(),
    })
}
