//! `ropuf`: reproducible RO PUF key-generation workflows.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 decoding
//! failure during `reconstruct`.

mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    DecodeFailure,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::DecodeFailure => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Data(m) => write!(f, "error: {m}"),
            Self::DecodeFailure => write!(f, "decoding failed: key not recovered"),
        }
    }
}

/// Maps any library error to a data error.
pub fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

#[derive(Parser)]
#[command(name = "ropuf", version, about = "RO PUF transform search, key generation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the 16×16 orthogonal transform catalog.
    SearchTransforms(SearchArgs),
    /// Generate a synthetic RO dataset as CSV.
    GenData(GenDataArgs),
    /// Equalize, quantize and evaluate one transform on a dataset.
    Eval(EvalArgs),
    /// Pick the catalog member with the smallest maximum bit-error probability.
    Select(SelectArgs),
    /// Enroll a device: draw a key and publish helper data.
    Enroll(EnrollArgs),
    /// Reconstruct a key from a re-measurement and helper data.
    Reconstruct(ReconstructArgs),
    /// Required minimum distance, GV dimension and block-error probability.
    AnalyzeCode(AnalyzeCodeArgs),
    /// Secret-key vs privacy-leakage rate regions.
    RateRegion(RateRegionArgs),
    /// Monte Carlo enroll/reconstruct simulation.
    Simulate(SimulateArgs),
}

/// BCH parameters given as `m,t`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CodeArg {
    pub m: u32,
    pub t: usize,
}

fn parse_code(s: &str) -> Result<CodeArg, String> {
    let (m, t) = s.split_once(',').ok_or("expected m,t")?;
    Ok(CodeArg {
        m: m.trim().parse().map_err(|_| format!("bad m {m:?}"))?,
        t: t.trim().parse().map_err(|_| format!("bad t {t:?}"))?,
    })
}

/// Transform choice shared by the extraction commands.
#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    /// Catalog JSON from `search-transforms`.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Catalog member id (defaults to the Walsh-Hadamard member).
    #[arg(long)]
    pub transform_id: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct GenDataArgs {
    #[arg(long)]
    pub devices: usize,
    #[arg(long)]
    pub measurements: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_x: f64,
    #[arg(long, default_value_t = 0.6)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.05)]
    pub sigma_e: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu0: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub transform: TransformArgs,
    #[arg(long, default_value_t = 1)]
    pub bits_per_coeff: u8,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SelectArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub catalog: PathBuf,
    /// Evaluate this many seeded random members plus the Walsh-Hadamard member.
    #[arg(long, requires = "seed")]
    pub subset: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EnrollArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Device index in order of appearance in the dataset (0-based).
    #[arg(long)]
    pub device: usize,
    /// Measurement number as written in the dataset (1-based).
    #[arg(long, default_value_t = 1)]
    pub measurement: usize,
    #[command(flatten)]
    pub transform: TransformArgs,
    /// Equalization profile JSON; fitted from the dataset when omitted.
    #[arg(long)]
    pub equalization: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub bits_per_coeff: u8,
    #[arg(long, value_parser = parse_code, default_value = "8,18")]
    pub code: CodeArg,
    /// Seed of the key generator.
    #[arg(long)]
    pub seed: u64,
    /// Helper-data JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub device: usize,
    #[arg(long, default_value_t = 2)]
    pub measurement: usize,
    #[arg(long)]
    pub helper: PathBuf,
    #[arg(long)]
    pub equalization: PathBuf,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Optional file receiving the key hex.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct AnalyzeCodeArgs {
    #[arg(long, default_value_t = 255)]
    pub n: usize,
    /// Worst-case bit-error probability.
    #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
    pub p_max: Option<f64>,
    /// Error profile JSON; its `p_max` drives the design.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    pub target: f64,
    /// Correction capability at which to report the block-error probability.
    #[arg(long)]
    pub t: Option<usize>,
    /// Optional JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct RateRegionArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    #[arg(long, default_value_t = 255)]
    pub n: usize,
    #[arg(long, default_value_t = ropuf_core::analysis::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, value_parser = parse_code, default_value = "8,18")]
    pub code: CodeArg,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_code, default_value = "8,18")]
    pub code: CodeArg,
    /// Error profile JSON (profile mode).
    #[arg(long, conflicts_with_all = ["p", "dataset"])]
    pub profile: Option<PathBuf>,
    /// Constant bit-error probability (profile mode).
    #[arg(long, conflicts_with = "dataset")]
    pub p: Option<f64>,
    /// RO dataset (dataset mode).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[command(flatten)]
    pub transform: TransformArgs,
    #[arg(long, default_value_t = 1)]
    pub bits_per_coeff: u8,
    #[arg(long)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Optional JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SearchTransforms(a) => commands::search_transforms(&a),
        Command::GenData(a) => commands::gen_data(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Select(a) => commands::select(&a),
        Command::Enroll(a) => commands::enroll(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::AnalyzeCode(a) => commands::analyze_code(&a),
        Command::RateRegion(a) => commands::rate_region(&a),
        Command::Simulate(a) => commands::simulate(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
