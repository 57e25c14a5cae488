use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctmc_sens::estimators::{FdMode, TraceMethod};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "ctmcsens",
    version,
    about = "Simulate reaction-network Markov chains and estimate parameter sensitivities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Estimate d/dtheta E f(X(T)) with one method.
    Estimate(EstimateArgs),
    /// Variance of the per-path contribution versus time, for one or more methods.
    Trace(TraceArgs),
    /// Reproduce the benchmark tables on the gene-expression model.
    Bench(BenchArgs),
    /// Reference values: moment equations or uniformization.
    Oracle(OracleArgs),
    /// Simulate and print a single path or coupled pair.
    Simulate(SimulateArgs),
}

/// Where the model comes from and what is measured.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Bundled model: gene, mmq, mmq-death, toggle or puredeath.
    #[arg(long, conflicts_with = "model")]
    pub preset: Option<String>,
    /// Model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Parameter to differentiate (preset default if omitted).
    #[arg(long)]
    pub param: Option<String>,
    /// Value of the parameter (model value if omitted).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Observable f(x), an expression over species (preset default if omitted).
    #[arg(long)]
    pub observable: Option<String>,
    /// Horizon T (preset default if omitted).
    #[arg(long = "time", short = 'T')]
    pub time: Option<f64>,
}

/// Monte Carlo settings.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Number of sample paths R (preset default if omitted).
    #[arg(long, short = 'R')]
    pub paths: Option<usize>,
    /// Base seed.
    #[arg(long, env = "CTMCSENS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// cmc, cfd, crp, crn, naive or girsanov.
    #[arg(long, default_value = "cfd")]
    pub method: TraceMethod,
    /// Finite-difference perturbation (preset default if omitted).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Centered)]
    pub mode: ModeArg,
    /// Likelihood-ratio method only: subtract the sample mean of f.
    #[arg(long)]
    pub centered_score: bool,
    /// Append a CSV row to this file (header written if the file is new).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Print the report as JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated methods, e.g. `cfd,crp`.
    #[arg(long, value_delimiter = ',', default_value = "cfd")]
    pub methods: Vec<TraceMethod>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Centered)]
    pub mode: ModeArg,
    /// Time grid: `start:stop:step` or a comma-separated list.
    #[arg(long)]
    pub grid: String,
    /// Write the trace as CSV here (standard output otherwise).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write an SVG line chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Only `gene` is supported.
    #[arg(long, default_value = "gene")]
    pub preset: String,
    /// 1: methods by R and epsilon; 2: likelihood ratio by R; 3: R needed for a target interval.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub table: u8,
    /// Comma-separated path counts (tables 1 and 2).
    #[arg(long, value_delimiter = ',')]
    pub paths: Vec<usize>,
    /// Methods for table 3.
    #[arg(long, value_delimiter = ',', default_value = "cfd,crp")]
    pub methods: Vec<TraceMethod>,
    /// Target 95% half-width for table 3.
    #[arg(long, default_value_t = 6.0)]
    pub target_ci: f64,
    /// Pilot size for table 3.
    #[arg(long, default_value_t = 1000)]
    pub pilot: usize,
    /// Refuse plans above this many paths (table 3).
    #[arg(long, default_value_t = 1_000_000)]
    pub max_paths: usize,
    #[arg(long, env = "CTMCSENS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Write the rows as CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleQuantity {
    /// E f(X(T)) from the first-moment equations (affine networks).
    Mean,
    /// d/dtheta E f(X(T)) from the first-moment equations (affine networks).
    Sensitivity,
    /// E f(X(T)) by uniformization on a truncated box.
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(value_enum)]
    pub quantity: OracleQuantity,
    /// Upper corner of the truncation box, comma-separated (preset default if omitted).
    #[arg(long, value_delimiter = ',')]
    pub r#box: Vec<i64>,
    /// Uniformization tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMethod {
    Nrm,
    Gillespie,
    Cmc,
    Cfd,
    Crp,
    Crn,
    Naive,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = SimMethod::Nrm)]
    pub method: SimMethod,
    /// Perturbation for coupled pairs.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Centered)]
    pub mode: ModeArg,
    #[arg(long, env = "CTMCSENS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Record every n-th jump.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    /// Write CSV here (standard output otherwise).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Forward,
    Centered,
}

impl From<ModeArg> for FdMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Forward => FdMode::Forward,
            ModeArg::Centered => FdMode::Centered,
        }
    }
}
