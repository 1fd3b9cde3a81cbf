use std::path::PathBuf;

use allstd_core::envs::EnvId;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "allstd", version, about = "LSTD(λ) with leave-one-trajectory-out λ selection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate trajectories and write them as JSONL.
    Gen(GenArgs),
    /// Fit and evaluate methods over independent trials; writes CSV.
    Run(RunArgs),
    /// Time methods over a sweep of dataset sizes; writes CSV.
    Bench(BenchArgs),
    /// Render a run or bench CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Allstd,
    NaiveCv,
    LstdFixed,
    RlstdFixed,
    /// One LSTD solve per grid λ, without selecting.
    #[value(name = "k-x-lstd")]
    KxLstd,
    #[value(name = "k-x-rlstd")]
    KxRlstd,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Allstd => "allstd",
            Method::NaiveCv => "naive-cv",
            Method::LstdFixed => "lstd-fixed",
            Method::RlstdFixed => "rlstd-fixed",
            Method::KxLstd => "k-x-lstd",
            Method::KxRlstd => "k-x-rlstd",
        }
    }
}

fn parse_env(s: &str) -> Result<EnvId, String> {
    s.parse().map_err(|e: allstd_core::Error| e.to_string())
}

fn parse_lambda(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("λ must be in [0, 1], got {v}"))
    }
}

fn parse_gamma(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("gamma must be in [0, 1], got {v}"))
    }
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite value >= 0, got {v}"))
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer, got {s:?}")),
        Ok(v) => Ok(v),
    }
}

/// Where trajectories come from: a generator or a JSONL file.
#[derive(Debug, Args)]
pub struct Source {
    #[arg(long, value_parser = parse_env, conflicts_with = "data")]
    pub env: Option<EnvId>,

    /// Episode length cap; defaults to the domain's own.
    #[arg(long, value_parser = parse_count, conflicts_with = "data")]
    pub horizon: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Trajectory JSONL to use instead of generating.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Solver {
    /// Comma-separated, strictly increasing grid in [0, 1].
    #[arg(long, value_delimiter = ',', value_parser = parse_lambda)]
    pub lambdas: Option<Vec<f64>>,

    /// Discount override.
    #[arg(long, value_parser = parse_gamma)]
    pub gamma: Option<f64>,

    #[arg(long, default_value_t = allstd_core::lstd::DEFAULT_RIDGE, value_parser = parse_nonnegative)]
    pub ridge: f64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_env, default_value = "random-walk")]
    pub env: EnvId,

    #[arg(long, value_parser = parse_count, default_value = "100")]
    pub n: usize,

    #[arg(long, value_parser = parse_count)]
    pub horizon: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,

    #[command(flatten)]
    pub solver: Solver,

    /// Comma-separated dataset sizes; each trial uses nested prefixes.
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "100")]
    pub n: Vec<usize>,

    #[arg(long, value_parser = parse_count, default_value = "20", conflicts_with = "data")]
    pub trials: usize,

    #[arg(long, value_enum, value_delimiter = ',', default_value = "allstd")]
    pub method: Vec<Method>,

    /// λ for the fixed methods; without it they run every grid λ.
    #[arg(long, value_parser = parse_lambda)]
    pub lambda: Option<f64>,

    /// Worker threads for trials; 0 uses every core.
    #[arg(long, env = "ALLSTD_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Leave the seconds column empty so output is reproducible byte for byte.
    #[arg(long)]
    pub omit_timing: bool,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub source: Source,

    #[command(flatten)]
    pub solver: Solver,

    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "25,50,100")]
    pub n: Vec<usize>,

    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "allstd,naive-cv,k-x-lstd,k-x-rlstd"
    )]
    pub method: Vec<Method>,

    /// λ for lstd-fixed and rlstd-fixed.
    #[arg(long, value_parser = parse_lambda)]
    pub lambda: Option<f64>,

    /// Timed repetitions per cell (at least 5).
    #[arg(long, default_value_t = allstd_core::eval::MIN_REPS)]
    pub reps: usize,

    /// Leave median_seconds empty so output is reproducible byte for byte.
    #[arg(long)]
    pub omit_timing: bool,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV written by `run` or `bench`.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub title: Option<String>,
}
