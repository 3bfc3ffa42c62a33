//! `charconv` command-line tool.
//!
//! Exit codes: 0 success, 2 invalid input (schema, parse, unknown
//! agent/state), 3 I/O failure, 4 no informative observations to fit.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "charconv",
    version,
    about = "Score, simulate and fit dialogue move choices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Table,
    Machine,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Method {
    Grid,
    Gradient,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file.
    Validate { path: PathBuf },

    /// Score one agent's move space.
    Score {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Conversational state (defaults to the active type's initial state).
        #[arg(long)]
        state: Option<String>,
        /// Agent name (defaults to the first agent).
        #[arg(long)]
        agent: Option<String>,
    },

    /// Run a scripted two-agent dialogue.
    Simulate {
        path: PathBuf,
        /// Base seed for sampling policies; agent i samples with seed + i.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the machine-readable trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },

    /// Recover mixing weights from an observation file.
    Fit {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "grid")]
        method: Method,
        #[arg(long, default_value_t = charconv_core::estimate::DEFAULT_GRID_STEP)]
        step: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Also fit disjoint windows of this many observations and report shifts.
        #[arg(long)]
        window: Option<usize>,
        /// Dirichlet prior concentrations `a,b,c` (each >= 1).
        #[arg(long, value_delimiter = ',')]
        prior: Option<Vec<f64>>,
    },

    /// Write a synthetic observation file drawn from planted weights over the
    /// bakery reply factors.
    Synth {
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        jitter: f64,
        /// Planted weights `alpha,beta,gamma`.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.1,0.8")]
        weights: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path } => commands::validate(&path),
        Command::Score {
            path,
            format,
            state,
            agent,
        } => commands::score(&path, format, state.as_deref(), agent.as_deref()),
        Command::Simulate { path, seed, trace } => commands::simulate(&path, seed, trace.as_deref()),
        Command::Fit {
            path,
            method,
            step,
            format,
            window,
            prior,
        } => commands::fit(&path, method, step, format, window, prior.as_deref()),
        Command::Synth {
            count,
            seed,
            jitter,
            weights,
            out,
        } => commands::synth(count, seed, jitter, &weights, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
