//! `wfaug`: generate balanced artificial surgical videos from an annotated
//! corpus, build baselines, and report statistics and metrics.
//!
//! Exit codes: 0 on success, 2 for invalid arguments or configuration,
//! 3 for problems with the input data.

mod commands;
mod config;
mod files;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wfaug::ErrorKind;

/// Invalid user input detected by the front end itself.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser, Debug)]
#[command(name = "wfaug", version, about = "Workflow-graph video augmentation")]
pub struct Cli {
    /// Config file (TOML); defaults to $WFAUG_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Class catalog (TOML); overrides the config.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Extract the workflow graph from an annotation directory.
    ExtractWorkflow(ExtractArgs),
    /// Cut the annotated videos into segments and write the manifest.
    BuildSegments(SegmentArgs),
    /// Generate artificial videos as edit decision lists.
    Generate(GenerateArgs),
    /// Split-augmentation baseline: every k-th frame per sub-video.
    SplitBaseline(SplitArgs),
    /// Corpus statistics, optionally compared with a generated corpus.
    Stats(StatsArgs),
    /// Score predicted label tracks against ground truth.
    Evaluate(EvaluateArgs),
    /// Write the packaged skewed synthetic corpus.
    DemoCorpus(DemoArgs),
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    pub annotations: PathBuf,
    /// Graph output file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Edge weights: uniform or empirical.
    #[arg(long)]
    pub mode: Option<String>,
    /// Also write the phase report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    pub annotations: PathBuf,
    /// Manifest output file (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the statistics report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    pub annotations: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub num: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<String>,
    /// Use this graph file instead of extracting one.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long)]
    pub max_walk_len: Option<usize>,
    /// Render frames from `<DIR>/<video>/<index:06>.png`.
    #[arg(long, value_name = "DIR")]
    pub render: Option<PathBuf>,
    /// Interpolator: identity, linear or cmd:<program>.
    #[arg(long)]
    pub interpolator: Option<String>,
    #[arg(long)]
    pub no_spatial: bool,
    #[arg(long)]
    pub unit_speed: bool,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    pub annotations: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub render: Option<PathBuf>,
    #[arg(long)]
    pub no_spatial: bool,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Source annotation directory.
    pub annotations: PathBuf,
    /// Generated label directory to compare against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Write the report as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    pub truth: PathBuf,
    pub predictions: PathBuf,
    /// Score every n-th frame.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Also write synthetic frames of this size, e.g. 16x12.
    #[arg(long, value_name = "WxH")]
    pub frames: Option<String>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<wfaug::Error>() {
            return match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Data => 3,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
