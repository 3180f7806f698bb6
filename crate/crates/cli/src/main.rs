//! Command-line front end: dataset generation, detection, evaluation,
//! plotting, and hyperparameter sweeps, all seeded and replayable.

mod bench;
mod detect;
mod plot;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "dmca", version, about = "Outlier micro-cluster detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a detector over a CSV dataset and write score/cluster artifacts.
    Detect(DetectArgs),
    /// Score artifacts against a labeled dataset.
    Eval(EvalArgs),
    /// Emit a synthetic benchmark dataset.
    Generate(GenerateArgs),
    /// Plant Gaussian-mixture outlier micro-clusters into host inliers.
    Inject(InjectArgs),
    /// Render a 2D dataset (and optional artifacts) to SVG.
    Plot(PlotArgs),
    /// Sweep the subsample-size grid over several seeds.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// Two-phase detector: hyperensemble warm-up, then sequential pruning.
    Dmca,
    /// Single-phase sequential pruning ensemble.
    Dmca0,
    /// Plain hypersphere ensemble, no pruning.
    Inne,
    /// Ablation that prunes the current top scorers instead.
    PruneTopScore,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dmca => "dmca",
            Algorithm::Dmca0 => "dmca0",
            Algorithm::Inne => "inne",
            Algorithm::PruneTopScore => "prune-top-score",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "dmca" => Some(Algorithm::Dmca),
            "dmca0" => Some(Algorithm::Dmca0),
            "inne" => Some(Algorithm::Inne),
            "prune-top-score" => Some(Algorithm::PruneTopScore),
            _ => None,
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Input dataset CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    algorithm: Option<Algorithm>,
    /// Warm-up subsample ceiling (dmca only).
    #[arg(long)]
    psi_max: Option<usize>,
    /// Subsample size (dmca0, inne, prune-top-score).
    #[arg(long)]
    psi: Option<usize>,
    /// Ensemble rounds.
    #[arg(long)]
    iters: Option<usize>,
    /// Candidate-set size as a fraction of n.
    #[arg(long)]
    p_frac: Option<f64>,
    #[arg(long, env = "DMCA_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    maximin_stop_ratio: Option<f64>,
    #[arg(long)]
    peak_sigma: Option<f64>,
    /// Threshold edge weights over distinct values rather than all values.
    #[arg(long, value_name = "BOOL")]
    tau_e_distinct: Option<bool>,
    /// Run every warm-up member for a single round.
    #[arg(long)]
    warmup_flat: bool,
    #[arg(long)]
    scores_out: Option<PathBuf>,
    #[arg(long)]
    clusters_out: Option<PathBuf>,
    /// Per-iteration diagnostics as JSON lines.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Replay a recorded run; remaining flags may override artifact paths.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Scores CSV from detect.
    #[arg(long)]
    scores: PathBuf,
    /// Clusters JSON from detect.
    #[arg(long)]
    clusters: PathBuf,
    /// Labeled dataset CSV providing the ground truth.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    metrics_out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// One of synthetic10, spiral, sandwich, vdensity, blobs.
    #[arg(long)]
    family: String,
    #[arg(long, env = "DMCA_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InjectArgs {
    /// Host dataset CSV; rows labeled 0 serve as the inliers.
    #[arg(long)]
    input: PathBuf,
    /// Injection spec JSON: {"k": …, "clusters": [{"size": …, "offset_scale": …, "stdev_scale": …}], "seed": …}.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    clusters: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(args) => detect::run(args),
        Command::Eval(args) => tasks::eval(args),
        Command::Generate(args) => tasks::generate(args),
        Command::Inject(args) => tasks::inject(args),
        Command::Plot(args) => plot::run(args),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Semantic flag conflicts get the same treatment as clap's own usage
/// errors: message to stderr, exit code 2.
fn usage_error(msg: &str) -> ! {
    eprintln!("usage error: {msg}");
    std::process::exit(2);
}
