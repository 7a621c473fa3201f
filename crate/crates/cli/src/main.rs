use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod input;
mod report;

use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "ergo",
    version,
    about = "Exact maximal ergodic inequality checks and Birkhoff average experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate ∫_{f*_N > λ}(f − λ) over a range of horizons on a finite system.
    VerifyMaximal(VerifyMaximalArgs),
    /// Build a block decomposition certificate for one orbit window.
    Decompose(DecomposeArgs),
    /// Recheck a certificate against the window it claims to decompose.
    VerifyCert(VerifyCertArgs),
    /// Birkhoff averages A_k f(x) for k = 1..K as CSV.
    Birkhoff(BirkhoffArgs),
    /// Sampled averages at k = 2^a..2^b against the space average, as CSV.
    Converge(ConvergeArgs),
    /// Seeded campaign over random finite systems.
    Fuzz(FuzzArgs),
    /// The λ_n sweeps that turn the maximal inequality into the ergodic theorem.
    Corollary(CorollaryArgs),
}

#[derive(Args)]
struct SystemArg {
    /// System description (JSON).
    #[arg(long)]
    system: PathBuf,
    /// Replace f by f·1{|f| ≤ s} (finite systems only).
    #[arg(long, value_name = "S")]
    truncate: Option<u64>,
}

#[derive(Args)]
struct VerifyMaximalArgs {
    #[command(flatten)]
    system: SystemArg,
    /// `system`, `grid`, a constant `p/q`, or per-cycle values `a,b,...`.
    #[arg(long, default_value = "system")]
    lambda: String,
    /// Inclusive horizon range `A..B`.
    #[arg(long, value_name = "A..B")]
    n_range: String,
    /// Report file (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long, default_value = "system")]
    lambda: String,
    /// Orbit start (finite systems).
    #[arg(long, default_value_t = 0)]
    x: usize,
    /// Horizon N.
    #[arg(long = "N", value_name = "N")]
    horizon: usize,
    /// Window length m ≥ N.
    #[arg(long)]
    m: usize,
    /// Certificate file (JSON).
    #[arg(long)]
    emit: PathBuf,
}

#[derive(Args)]
struct VerifyCertArgs {
    #[arg(long)]
    cert: PathBuf,
    #[command(flatten)]
    system: SystemArg,
    #[arg(long, default_value = "system")]
    lambda: String,
    /// Orbit start, when the certificate does not record one.
    #[arg(long)]
    x: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BirkhoffArgs {
    #[command(flatten)]
    system: SystemArg,
    #[arg(long, default_value_t = 0)]
    x: usize,
    /// Largest k.
    #[arg(long)]
    k: usize,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long, default_value_t = 4)]
    min_exp: u32,
    #[arg(long, default_value_t = 20)]
    max_exp: u32,
    /// Limit to compare against; defaults to the space average of f.
    #[arg(long)]
    limit: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct FuzzArgs {
    /// Inclusive seed range `A..B`.
    #[arg(long, value_name = "A..B")]
    seeds: String,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    /// Comma-separated checks, or `all`.
    #[arg(long, default_value = "theorem,decomposition")]
    checks: String,
    /// Directory for reproduction files of failing cases.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CorollaryArgs {
    #[command(flatten)]
    system: SystemArg,
    /// Largest n; defaults to ⌈‖f⁺‖∞⌉ + 3.
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("ERGO_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("ERGO_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli, argv: Vec<String>) -> CliResult<bool> {
    configure_threads()?;
    match cli.command {
        Command::VerifyMaximal(a) => commands::verify_maximal(argv, a),
        Command::Decompose(a) => commands::decompose(argv, a),
        Command::VerifyCert(a) => commands::verify_cert(argv, a),
        Command::Birkhoff(a) => commands::birkhoff(argv, a),
        Command::Converge(a) => commands::converge(argv, a),
        Command::Fuzz(a) => commands::fuzz(argv, a),
        Command::Corollary(a) => commands::corollary(argv, a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::iter::once("ergo".to_string())
        .chain(std::env::args().skip(1))
        .collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
