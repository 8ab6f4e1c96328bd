//! `mediff`: detect, decompose, evaluate and synthesize seasonal metrics.

mod commands;
mod output;
mod tuning;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tuning::Tuning;

#[derive(Parser, Debug)]
#[command(name = "mediff", version, about = "Median decomposition anomaly detection for seasonal metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect anomalies and write one JSON report per batch (JSON Lines).
    Detect(DetectArgs),
    /// Write the columnar decomposition trace of one series.
    Decompose(DecomposeArgs),
    /// Score detections against labels and write a metrics table.
    Eval(EvalArgs),
    /// Generate a labelled synthetic series.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct Batching {
    /// Samples per detection batch
    #[arg(long, default_value_t = mediff_core::detector::DEFAULT_BATCH_LEN)]
    batch_len: usize,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Series CSV (`timestamp,value`); repeat for several series
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Calendar TOML with DST transitions and holidays
    #[arg(long)]
    calendar: Option<PathBuf>,
    /// Report file; standard output when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    batching: Batching,
    /// Samples between consecutive batch starts
    #[arg(long, default_value_t = mediff_core::detector::DEFAULT_STRIDE)]
    stride: usize,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    calendar: Option<PathBuf>,
    /// Trace CSV; standard output when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Series CSV; repeat for several series
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Label JSON, one per --input and in the same order
    #[arg(long, required = true)]
    labels: Vec<PathBuf>,
    #[arg(long)]
    calendar: Option<PathBuf>,
    /// Metrics CSV; standard output when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    batching: Batching,
    /// Latest accepted detection after a label, in minutes
    #[arg(long, default_value_t = 10)]
    delay_budget_minutes: i64,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Directory receiving series.csv, labels.json, calendar.toml, manifest.json
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML generator spec; flags below are ignored when given
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "synthetic")]
    series_id: String,
    /// Series length in seasons
    #[arg(long, default_value_t = 4)]
    seasons: usize,
    #[arg(long, default_value_t = mediff_core::config::WEEK_OF_MINUTES)]
    season_len: usize,
    #[arg(long, default_value_t = 10.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 8)]
    spikes: usize,
    #[arg(long, default_value_t = 2)]
    level_shifts: usize,
    /// Anomaly magnitude in multiples of the noise standard deviation
    #[arg(long, default_value_t = 8.0)]
    magnitude_sigma: f64,
    /// Shift the seasonal pattern by this many samples from mid-series on
    #[arg(long)]
    dst_offset: Option<i64>,
    /// Add a holiday dip of this many samples in the third season
    #[arg(long)]
    holiday_len: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    missing_rate: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => commands::detect(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::Eval(a) => commands::eval(a),
        Command::Synth(a) => commands::synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<tuning::UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
