mod checkpoint;
mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Defaults, Ini, RunArgs, RunConfig};
use error::{CliError, CliResult};

/// Separability probabilities of two-qubit and qubit-qutrit states.
#[derive(Debug, Parser)]
#[command(name = "qsep", version)]
struct Cli {
    /// INI-style file with run settings; flags take precedence
    #[arg(long, global = true, env = "QSEP_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// PPT probability as a function of the alpha parameter
    AlphaCurve(RunArgs),
    /// Eigenvalue separability function over C_max
    Esf(RunArgs),
    /// Marginal density of C_max
    Marginal(RunArgs),
    /// Absolute-separability probability
    AbsSep(RunArgs),
    /// PPT probability among states with concurrence at most C0
    SepVsConcurrence(RunArgs),
    /// Closed-form constants, identities and fitted curves
    Oracle {
        /// all | <id> | verify <identity> | beta_fit <beta> | fit <curve> <alpha> | marg_rank3 <C> <beta>
        #[arg(required = true, num_args = 1..)]
        args: Vec<String>,
        /// Separability function for the ESF identities: one, zero or dyson
        #[arg(long, default_value = "one")]
        sigma: String,
    },
    /// Run the acceptance criteria
    Check {
        /// smoke or full
        level: String,
        /// Comma list of criterion numbers
        #[arg(long)]
        only: Option<String>,
        /// Only the criteria that need no sampling
        #[arg(long)]
        oracle_only: bool,
        /// Sample count (a floor at full level)
        #[arg(long)]
        samples: Option<u64>,
        /// JSON summary path
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sampling(
    name: &'static str,
    args: &RunArgs,
    config: Option<&PathBuf>,
    defaults: Defaults,
    f: fn(&RunConfig) -> CliResult<()>,
) -> CliResult<()> {
    let ini = match config {
        Some(p) => Ini::load(p, name)?,
        None => Ini::default(),
    };
    f(&RunConfig::resolve(name, args, &ini, &defaults)?)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let cfg = cli.config.as_ref();
    match cli.command {
        Command::AlphaCurve(a) => sampling(
            "alpha-curve",
            &a,
            cfg,
            Defaults { system: "2q-real", grid: "0:1:1000", bins: 1 },
            commands::alpha_curve,
        ),
        Command::Esf(a) => sampling(
            "esf",
            &a,
            cfg,
            Defaults { system: "2q-real,2q-complex", grid: "0:1:100", bins: 500 },
            commands::esf,
        ),
        Command::Marginal(a) => sampling(
            "marginal",
            &a,
            cfg,
            Defaults { system: "2q-complex", grid: "0:1:100", bins: 100 },
            commands::marginal,
        ),
        Command::AbsSep(a) => sampling(
            "abs-sep",
            &a,
            cfg,
            Defaults { system: "2q-complex", grid: "0:1:100", bins: 1 },
            commands::abs_sep,
        ),
        Command::SepVsConcurrence(a) => sampling(
            "sep-vs-concurrence",
            &a,
            cfg,
            Defaults { system: "2q-complex", grid: "0:1:100", bins: 1 },
            commands::sep_vs_concurrence,
        ),
        Command::Oracle { args, sigma } => commands::oracle(&args, &sigma),
        Command::Check { level, only, oracle_only, samples, out } => commands::check(commands::CheckArgs {
            level: &level,
            only: only.as_deref(),
            oracle_only,
            samples,
            out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => CliError::Config(String::new()).exit_code(),
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
