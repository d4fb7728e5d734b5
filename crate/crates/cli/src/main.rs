//! `fishnet` command-line front end.

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Run(#[from] fishnet::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fishnet", version, about = "Strength statistics of fishnet lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo peak strengths: samples.csv, cdf.csv, hist.csv.
    Simulate(RunArgs),
    /// Analytical model curves over a stress grid: models.csv, sigma_T.json.
    Models(RunArgs),
    /// Stress-ratio field around a damage pattern: eta.csv, calibration.json.
    Eta(RunArgs),
    /// Empirical strength curves across aspect ratios at fixed link count.
    ShapeSweep(RunArgs),
    /// Renders a CSV artifact as SVG.
    Plot(PlotArgs),
    /// Kolmogorov-Smirnov self-test of the strength sampler.
    SampleDist(SampleArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML experiment file.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to the config, then FISHNET_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides `[sampling] count`.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Overrides `[sampling] seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV written by another subcommand.
    pub input: PathBuf,
    /// Defaults to the input path with an `.svg` extension.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Plot `P_f` on linear axes even when Weibull ordinates are present.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(short, long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Models(a) => commands::models(&a),
        Command::Eta(a) => commands::eta(&a),
        Command::ShapeSweep(a) => commands::shape_sweep(&a),
        Command::Plot(a) => commands::plot(&a),
        Command::SampleDist(a) => commands::sample_dist(&a),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fishnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
