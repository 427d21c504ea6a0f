//! The `requant` command line.
//!
//! Exit status: 0 on success, 2 for usage errors (bad flags, bit-width out of
//! range, unreadable manifest, unknown layer), 1 for failures while
//! processing. Every failure writes one JSON line to stderr:
//! `{"error": <kind>, "message": <text>, "tensor": <name or null>}`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{ErrorKind, QuantError};
use crate::io::{self, QuantReportDocument, ReportFormat, SearchRow, REPORT_FILE};
use crate::pipeline::{compare_searches, dequantize_tensor, quantize_model, Emit, PipelineConfig};
use crate::search::{Method, SearchSettings, GOLDEN_PHI};
use crate::tensor::{BitWidth, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "requant",
    version,
    about = "Post-training weight quantization with searched clipping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantize every tensor of a model manifest.
    Quantize(QuantizeArgs),
    /// Run golden-section, bisection and Nelder-Mead on one layer.
    CompareSearches(CompareArgs),
    /// Print a saved report as JSON or CSV.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Search termination width.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Lower end of the alpha search interval.
    #[arg(long, default_value_t = 1e-3)]
    alpha_min: f64,
    /// Golden-section contraction factor.
    #[arg(long, default_value_t = GOLDEN_PHI)]
    phi: f64,
}

#[derive(Debug, Args)]
struct QuantizeArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
    bits: u32,
    /// full, clip, reshape or requant (or the long names uniform-full, ...).
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,
    #[command(flatten)]
    search: SearchArgs,
    /// golden, bisection, nelder-mead or grid.
    #[arg(long, default_value = "golden", value_parser = parse_method)]
    method: Method,
    /// Bit-width for the first and last tensor (default: max(8, --bits)).
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
    first_last_bits: Option<u32>,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated subset of codes,fake,report. report.json is always written.
    #[arg(long, default_value = "codes,fake,report")]
    emit: String,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
    bits: u32,
    #[arg(long)]
    layer: String,
    #[command(flatten)]
    search: SearchArgs,
    /// csv prints layer,method,alpha,loss,time_ms; json adds evals and bits.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// A report.json file or the output directory containing it.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: ReportFormat,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: QuantError| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: QuantError| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: QuantError| e.to_string())
}

enum Failure {
    Usage(String),
    Processing(QuantError),
}

impl From<QuantError> for Failure {
    fn from(e: QuantError) -> Self {
        match e.kind() {
            ErrorKind::Manifest | ErrorKind::BitWidth => Failure::Usage(e.to_string()),
            _ => Failure::Processing(e),
        }
    }
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as Clap;
            if matches!(e.kind(), Clap::DisplayHelp | Clap::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let message = e.to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            error_line(err, "usage", first, None);
            return 2;
        }
    };

    let result = match cli.command {
        Command::Quantize(a) => quantize(a, out),
        Command::CompareSearches(a) => compare(a, out),
        Command::Report(a) => report(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(message)) => {
            error_line(err, "usage", &message, None);
            2
        }
        Err(Failure::Processing(e)) => {
            error_line(err, e.kind().as_str(), &e.to_string(), e.tensor());
            1
        }
    }
}

fn error_line(err: &mut dyn Write, kind: &str, message: &str, tensor: Option<&str>) {
    let line = serde_json::json!({ "error": kind, "message": message, "tensor": tensor });
    let _ = writeln!(err, "{line}");
}

fn settings(a: &SearchArgs, method: Method) -> Result<SearchSettings, Failure> {
    let s = SearchSettings {
        epsilon: a.epsilon,
        phi: a.phi,
        alpha_min: a.alpha_min,
        method,
        ..SearchSettings::default()
    };
    s.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(s)
}

fn bits(b: u32) -> Result<BitWidth, Failure> {
    BitWidth::new(b).map_err(|e| Failure::Usage(e.to_string()))
}

fn quantize(a: QuantizeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let emit = Emit::parse(&a.emit).map_err(|e| Failure::Usage(e.to_string()))?;
    let bits_weights = bits(a.bits)?;
    let config = PipelineConfig {
        bits_weights,
        strategy: a.strategy,
        search: settings(&a.search, a.method)?,
        first_last_bits: bits(a.first_last_bits.unwrap_or(a.bits.max(8)))?,
        emit,
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let model = io::load_model(&a.manifest)?;
    let (quantized, reports) = quantize_model(&model, &config)?;
    let fake = if emit.fake {
        Some(
            quantized
                .iter()
                .map(dequantize_tensor)
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let codes: &[_] = if emit.codes { &quantized } else { &[] };
    io::save_quantized(&a.out, codes, fake.as_deref())?;

    let doc = QuantReportDocument::new(&config, &reports);
    std::fs::create_dir_all(&a.out).map_err(|e| QuantError::io(&a.out, e))?;
    io::write_atomic(&a.out.join(REPORT_FILE), &doc.to_json()?)?;
    if emit.report {
        io::write_atomic(&a.out.join("report.csv"), &doc.to_csv()?)?;
    }
    let _ = writeln!(
        out,
        "quantized {} tensors ({}) into {}; total loss {:e}",
        reports.len(),
        config.strategy,
        a.out.display(),
        doc.totals.loss_sum
    );
    Ok(())
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let b = bits(a.bits)?;
    let s = settings(&a.search, Method::Golden)?;
    let model = io::load_model(&a.manifest)?;
    let tensor = model
        .iter()
        .find(|t| t.name() == a.layer)
        .ok_or_else(|| Failure::Usage(format!("no layer named `{}` in manifest", a.layer)))?;
    let rows = compare_searches(tensor, b, &s)?;
    let bytes = match a.format {
        ReportFormat::Csv => {
            let rows: Vec<SearchRow> = rows.iter().map(SearchRow::from).collect();
            io::report::rows_to_csv(&rows)?
        }
        ReportFormat::Json => {
            let rows: Vec<io::ReportRow> = rows.iter().map(io::ReportRow::from).collect();
            io::to_json_pretty(&rows)?
        }
    };
    out.write_all(&bytes)
        .map_err(|e| QuantError::io("<stdout>", e))?;
    Ok(())
}

fn report(a: ReportArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let doc = io::read_report(&a.input)?;
    io::write_report(&doc, a.format, out)?;
    Ok(())
}
