use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::InputFormat;

#[derive(Debug, Parser)]
#[command(
    name = "mmax",
    version,
    about = "Upper confidence bounds for the largest unseen prevalence in incidence data",
    after_help = "All logarithms are natural. Exit codes: 0 success, 2 usage error, 3 data error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound the maximum unseen prevalence of an incidence file (JSON on stdout).
    Bound(BoundArgs),
    /// Interval lengths and coverage over an n or M grid.
    SimulateIntervals(IntervalArgs),
    /// Bounded vs unbounded sweep around the heuristic threshold, plus the M-overshoot sweep.
    CompareRegimes(RegimeArgs),
    /// Stopping-rule experiment over scenarios, policies and contamination rates.
    SimulateStopping(StoppingArgs),
    /// Accumulation curve, coverage and regime recommendation for an incidence file.
    Diagnose(DiagnoseArgs),
    /// Write a simulated incidence file.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Bonferroni,
    Worstcase,
    Bounded,
    Unbounded,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Zipf,
    Geometric,
    Homogeneous,
    TruncatedGeometric,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    pub format: InputFormat,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Defaults to 0.01 * alpha.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = mmax_core::unbounded::DEFAULT_BETA)]
    pub beta: f64,
    /// Alphabet size; required by bonferroni, worstcase and bounded.
    #[arg(long = "M")]
    pub m: Option<u64>,
    /// Number of sampling units; required with --format counts.
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long)]
    pub param: f64,
    #[arg(long, conflicts_with = "n_grid")]
    pub n: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Vec<u64>,
    #[arg(long = "M", conflicts_with = "m_grid")]
    pub m: Option<u64>,
    #[arg(long = "M-grid", value_delimiter = ',')]
    pub m_grid: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub reps: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    #[arg(long = "M", default_value_t = 1500)]
    pub m: u64,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1.05,1.02,1,0.95,0.9,0.85,0.825,0.8,0.75"
    )]
    pub zipf: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.1,0.08,0.05,0.02")]
    pub geometric: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1000,200,100,66.66666666666667,50")]
    pub homogeneous: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub reps: u64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Overshoot sweep output; defaults to `<out>` with an `.overshoot.csv` suffix.
    #[arg(long)]
    pub overshoot_out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,10,100,1000,10000,100000,1000000")]
    pub m_add_grid: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1.02")]
    pub overshoot_gamma: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub overshoot_n: u64,
    #[arg(long, default_value_t = 5000)]
    pub overshoot_m: u64,
}

#[derive(Debug, Args)]
pub struct StoppingArgs {
    #[arg(long, default_value_t = 200)]
    pub reps: u64,
    #[arg(long, default_value_t = 0.005)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.99)]
    pub coverage_target: f64,
    #[arg(long, default_value_t = 10_000)]
    pub n_max: u64,
    #[arg(long, value_delimiter = ',', default_value = "0,0.0001,0.0005,0.001,0.0025,0.005")]
    pub q_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    pub format: InputFormat,
    #[arg(long = "M")]
    pub m: Option<u64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = mmax_core::estimators::DEFAULT_PERMUTATIONS)]
    pub perms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Accumulation curve CSV (`k,mean_distinct`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long)]
    pub param: f64,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Singleton-error contamination rate.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long, value_enum, default_value = "dense")]
    pub format: InputFormat,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
