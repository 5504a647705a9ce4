//! `dxhog`: bound tables, trial batches, codebook spoofing, variational
//! optimization, record verification and self-tests.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on numeric or
//! verification failures.

mod commands;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dxhog::config::Config;

#[derive(Parser, Debug)]
#[command(
    name = "dxhog",
    version,
    about = "Distributed linear cross-entropy heavy-output generation toolkit"
)]
pub struct Cli {
    /// TOML configuration (noise constants, default seed, output directory).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classical communication bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Quantum protocol trials.
    #[command(subcommand)]
    Trial(TrialCmd),
    /// Classical codebook protocol.
    #[command(subcommand)]
    Spoof(SpoofCmd),
    /// Train a brickwork ansatz towards a Haar-random target.
    Optimize(OptimizeArgs),
    /// Replay logged trials.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Built-in consistency checks.
    Selftest {
        #[arg(value_enum)]
        level: Level,
    },
}

#[derive(Args, Debug, Clone)]
pub struct EnsembleArgs {
    /// product_clifford | clifford | design | haar
    #[arg(long, default_value = "clifford")]
    pub ensemble: String,
    /// Largest design order (design ensemble).
    #[arg(long, default_value_t = 10)]
    pub t_max: u32,
    /// Design approximation error (design ensemble).
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
}

#[derive(Subcommand, Debug)]
pub enum BoundsCmd {
    /// Fewest bits any classical protocol needs to reach --eps, or the
    /// F_XEB ceiling (and optimal a) at --m bits.
    Lower {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, conflicts_with = "m", required_unless_present = "m")]
        eps: Option<f64>,
        #[arg(long)]
        m: Option<u64>,
    },
    /// Bits the codebook protocol needs to reach --eps, or its F_XEB at --m.
    Upper {
        #[arg(long)]
        n: u32,
        #[arg(long, conflicts_with = "m", required_unless_present = "m")]
        eps: Option<f64>,
        #[arg(long)]
        m: Option<u64>,
        /// Integrate (1 - u^p)^M directly instead of the exponential form.
        #[arg(long)]
        exact: bool,
    },
    /// CSV table over qubit counts and ensembles.
    Sweep {
        /// Qubit counts: `a..b` (inclusive) or `a,b,c`.
        #[arg(long)]
        n: String,
        /// Comma-separated ensembles.
        #[arg(long, default_value = "clifford,haar")]
        ensemble: String,
        #[arg(long, default_value_t = 10)]
        t_max: u32,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Rows at the minimal m reaching this F_XEB.
        #[arg(long, conflicts_with = "m", required_unless_present = "m")]
        eps: Option<f64>,
        /// Message lengths: `a..b:step` or `a,b,c`.
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noisy Hidden Matching lower bound in bits.
    Hm {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum TrialCmd {
    /// Run trials, write JSONL records and print the summary.
    Run(TrialArgs),
}

#[derive(Args, Debug)]
pub struct TrialArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// ideal | depolarizing:F | ansatz:path
    #[arg(long, default_value = "ideal")]
    pub mode: String,
    /// Master seed, or `os` to draw one.
    #[arg(long)]
    pub seed: Option<String>,
    /// JSONL output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Certify the run against this F_XEB threshold (exit 2 on failure).
    #[arg(long)]
    pub certify: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub sigmas: f64,
}

#[derive(Subcommand, Debug)]
pub enum SpoofCmd {
    /// Codebook protocol against Haar-random measurements.
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: Option<String>,
        /// Summary JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n: usize,
    /// Number of ZZ layers.
    #[arg(long, alias = "d")]
    pub depth: usize,
    /// Target-state seed, or `os`.
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Ignore the noise model (pure overlap).
    #[arg(long)]
    pub noiseless: bool,
    /// Params JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum VerifyCmd {
    /// Recompute every score (and outcome, where possible) from its seeds.
    Records {
        path: PathBuf,
        /// Allowed absolute score difference (default: bit-exact).
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<dxhog::Error> for CliError {
    fn from(e: dxhog::Error) -> Self {
        use dxhog::Error as E;
        match e {
            E::Unreachable { .. } | E::NotNormalized(_) | E::ZeroVector | E::TooFewRecords(_) => {
                CliError::Failure(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(p) => Config::load(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => Config::default(),
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    commands::dispatch(cli.command, &config)
}
