//! `rankspec`: U-lag-window spectral estimates for rank-based serial
//! dependence from the command line.
//!
//! Exit codes: 0 success, 2 I/O or parse failure, 3 violated precondition,
//! 4 internal invariant breach.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use input::Column;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Precondition(#[from] rankspec::Error),
    #[error("invariant breach: {0}")]
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "rankspec", version, about = "Lag-window spectral estimation for rank-based serial dependence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-lag dependence estimates ξ_k.
    Acf(AcfArgs),
    /// Spectral estimate with bias, standard errors and intervals.
    Estimate(EstimateArgs),
    /// Simulate a series, one value per line.
    Simulate(SimulateArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Mc(McCommand),
    /// Hoeffding decomposition and degenerate-part decay.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input file, `-` for stdin.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Column index (0-based) or header name.
    #[arg(long, default_value = "0")]
    pub column: Column,
    /// Treat the first line as a header.
    #[arg(long)]
    pub skip_header: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AcfArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// tau, rho or cov.
    #[arg(short, long, default_value = "tau")]
    pub measure: rankspec::MeasureKind,
    /// Largest lag; defaults to min(n − 4, 20).
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(short, long, default_value = "tau")]
    pub measure: rankspec::MeasureKind,
    #[arg(short, long, default_value = "parzen")]
    pub window: rankspec::LagWindow,
    /// Window scale r_n, or `auto` for the plug-in rule.
    #[arg(short, long, default_value = "auto")]
    pub bandwidth: String,
    /// Frequency at which `auto` minimizes the asymptotic MSE.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub target_omega: f64,
    /// Grid size G; frequencies πj/G for j = 0..G.
    #[arg(short, long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Center intervals at f̂ instead of the bias-corrected estimate.
    #[arg(long)]
    pub raw_ci: bool,
    /// Floor f_hat and ci_low at zero in the output.
    #[arg(long)]
    pub clip_negative: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// iid-uniform, gaussian-ar1 or gaussian-copula-ar1.
    #[arg(long, default_value = "gaussian-ar1")]
    pub model: String,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub phi: f64,
    /// identity, exp, cube or uniform (gaussian-copula-ar1 only).
    #[arg(long, default_value = "identity")]
    pub marginal: rankspec::simlab::MarginalTransform,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(short, long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum McCommand {
    /// Standardized estimates, normality diagnostics and interval coverage.
    Clt(CltArgs),
    /// Monte Carlo bias across bandwidths.
    Bias(BiasArgs),
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(short, long, default_value = "tau")]
    pub measure: rankspec::MeasureKind,
    #[arg(short, long, default_value = "parzen")]
    pub window: rankspec::LagWindow,
    /// Fixed r_n, or `n^E` for r_n = n^E.
    #[arg(short, long, default_value = "n^0.2")]
    pub bandwidth: String,
    /// Target frequencies.
    #[arg(long, value_delimiter = ',', default_value = "1.5707963267948966")]
    pub omega: Vec<f64>,
    #[arg(short, long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 400)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long)]
    pub raw_ci: bool,
    /// CSV output lists every replicate instead of the summary.
    #[arg(long)]
    pub replicates: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BiasArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(short, long, default_value = "tau")]
    pub measure: rankspec::MeasureKind,
    #[arg(short, long, default_value = "parzen")]
    pub window: rankspec::LagWindow,
    #[arg(long, default_value_t = 0.0)]
    pub omega: f64,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub bandwidths: Vec<f64>,
    #[arg(short, long, default_value_t = 4096)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(short, long, default_value = "tau")]
    pub measure: rankspec::MeasureKind,
    #[arg(short, long, default_value_t = 20)]
    pub n: usize,
    #[arg(short, long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also run the decay experiment over these sizes.
    #[arg(long, value_delimiter = ',')]
    pub decay_sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

const THREADS_VAR: &str = "RANKSPEC_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Invariant(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Acf(a) => commands::acf(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Mc(McCommand::Clt(a)) => commands::mc_clt(&a),
        Command::Mc(McCommand::Bias(a)) => commands::mc_bias(&a),
        Command::Verify(a) => commands::verify(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
