//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rvosh_core::dataio::ReportFormat;
use rvosh_core::pipeline::{Mode, PromptPolicy};
use rvosh_core::sampling::SamplingStrategy;

#[derive(Debug, Parser)]
#[command(
    name = "rvosh",
    version,
    about = "Referring video object segmentation inference harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a bundled preset or a scene file into a dataset directory
    Synth(SynthArgs),
    /// Print the frame indices a sampling strategy selects
    Plan(PlanArgs),
    /// Run the pipeline over every expression of a dataset
    Run(RunArgs),
    /// Score a prediction directory against a dataset's ground truth
    Eval(EvalArgs),
    /// Run and score a grid of configurations
    Compare(CompareArgs),
    /// Convert a MeViS-style expression file into a canonical manifest
    ImportMevis(ImportArgs),
    /// Protocol v1 test worker (echo predictor, nearest-prompt propagator)
    #[command(hide = true)]
    StubWorker(StubArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Preset name (static, late-appearance, two-object-conflict) or scene file
    pub source: String,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Override the seed of every scene
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(value_parser = parse_sampling)]
    pub strategy: SamplingStrategy,
    /// Number of frames in the video
    pub frames_total: usize,
    /// Number of frames to sample
    pub frames: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Toy,
    External,
}

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value_t = BackendKind::Toy)]
    pub backend: BackendKind,
    /// Worker command for the external backend
    #[arg(long)]
    pub backend_cmd: Option<String>,
    /// Seconds to wait for each worker reply
    #[arg(long, default_value_t = 120)]
    pub backend_timeout: u64,
    /// Toy predictor: probability of answering with a distractor on a frame
    #[arg(long, default_value_t = 0.0)]
    pub swap_probability: f64,
    /// Toy predictor: signed Chebyshev dilation applied to every mask
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub dilation: i32,
    /// Parallel expressions
    #[arg(long, env = "RVOSH_WORKERS", default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = parse_mode, default_value = "consistent")]
    pub mode: Mode,
    /// Defaults to first for legacy and uniform for consistent
    #[arg(long, value_parser = parse_sampling)]
    pub sampling: Option<SamplingStrategy>,
    #[arg(long, default_value_t = 5)]
    pub frames: usize,
    /// "all" or "first:K"
    #[arg(long, value_parser = parse_policy, default_value = "all")]
    pub prompt_policy: PromptPolicy,
    /// Boundary tolerance in pixels, recorded for later evaluation
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Prediction directory written by `run`
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Boundary tolerance in pixels; default max(1, round(0.008 * diagonal))
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_parser = parse_format, default_value = "structured")]
    pub format: ReportFormat,
    /// Report path; default <pred>/report.json or report.csv
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, env = "RVOSH_WORKERS", default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated modes
    #[arg(long, default_value = "consistent")]
    pub mode: String,
    /// Comma-separated strategies; each mode's default when omitted
    #[arg(long)]
    pub sampling: Option<String>,
    /// Comma-separated frame counts
    #[arg(long, default_value = "5")]
    pub frames: String,
    /// Comma-separated prompt policies
    #[arg(long, default_value = "all")]
    pub prompt_policy: String,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_format, default_value = "structured")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// Expression file (meta_expressions.json)
    #[arg(long)]
    pub meta: PathBuf,
    /// Directory of per-frame label images, one subdirectory per video
    #[arg(long)]
    pub annotations: PathBuf,
    /// Frame image root; default JPEGImages next to the expression file
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Manifest to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StubArgs {
    #[arg(long)]
    pub protocol: Option<u32>,
    #[arg(long)]
    pub fault: Option<String>,
    #[arg(long)]
    pub fault_on: Option<String>,
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

pub fn parse_sampling(s: &str) -> Result<SamplingStrategy, String> {
    s.parse()
}

pub fn parse_policy(s: &str) -> Result<PromptPolicy, String> {
    s.parse()
}

pub fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}
