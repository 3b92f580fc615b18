//! Command-line front end: file formats, subcommands and the beta sweep.

pub mod commands;
pub mod error;
pub mod files;
pub mod format;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::{EqMethod, Solver};
use error::CliError;
use files::load_network;

#[derive(Debug, Parser)]
#[command(
    name = "effortnet",
    version,
    about = "Equilibria, price of anarchy and reward design for effort games on influence networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Fixed-point convergence tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration cap per fixed-point start.
    #[arg(long = "max-iter", global = true, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Starts for fixed-point iteration.
    #[arg(long, global = true, default_value_t = 16)]
    pub starts: usize,
    /// Seed for random starts, sampled certificates and heuristic design.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Grid points per coordinate for brute-force optimization.
    #[arg(long, global = true, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for a Nash equilibrium and certify uniqueness.
    Eq {
        network: PathBuf,
        /// Defaults to tree on hierarchies and fixed-point otherwise.
        #[arg(long, value_enum)]
        method: Option<EqMethod>,
    },
    /// Social-output maximizing efforts.
    Opt { network: PathBuf },
    /// Price of anarchy under the file's reward scheme.
    Poa { network: PathBuf },
    /// Price-of-anarchy bound for a balanced tree.
    Bound {
        #[arg(long)]
        d: usize,
        #[arg(long = "D", value_name = "D")]
        depth: usize,
        #[arg(long)]
        beta: f64,
    },
    /// Whether an effort profile can be made the equilibrium by some reward scheme.
    Stable {
        network: PathBuf,
        #[arg(long)]
        efforts: PathBuf,
        /// Use the generic LP instead of the closed-form test.
        #[arg(long)]
        lp: bool,
    },
    /// Design a reward scheme for the network.
    Design {
        network: PathBuf,
        /// Random schemes tried by the heuristic fallback.
        #[arg(long, default_value_t = 500)]
        candidates: usize,
        /// Write the network with the designed scheme to this file.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Both uniqueness certificates.
    Check { network: PathBuf },
    /// CSV of equilibrium and optimal output over a range of beta.
    Sweep {
        network: PathBuf,
        #[arg(long = "beta-range", value_name = "LO:HI:STEP")]
        beta_range: String,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep the file's reward scheme instead of designing one per beta.
        #[arg(long = "fixed-h")]
        fixed_h: bool,
        #[arg(long, default_value_t = 500)]
        candidates: usize,
    },
}

impl From<&SolverArgs> for Solver {
    fn from(a: &SolverArgs) -> Self {
        Solver {
            tol: a.tol,
            max_iter: a.max_iter,
            starts: a.starts,
            seed: a.seed,
            grid: a.grid,
        }
    }
}

/// Runs a parsed command; returns what goes to standard output.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let solver = Solver::from(&cli.solver);
    solver.check()?;
    match &cli.command {
        Command::Eq { network, method } => commands::eq(&load_network(network)?, *method, &solver),
        Command::Opt { network } => commands::opt(&load_network(network)?, &solver),
        Command::Poa { network } => commands::poa_cmd(&load_network(network)?, &solver),
        Command::Bound { d, depth, beta } => commands::bound(*d, *depth, *beta),
        Command::Stable {
            network,
            efforts,
            lp,
        } => commands::stable(&load_network(network)?, efforts, *lp),
        Command::Design {
            network,
            candidates,
            save,
        } => commands::design(
            &load_network(network)?,
            &solver,
            *candidates,
            save.as_deref(),
        ),
        Command::Check { network } => commands::check(&load_network(network)?, &solver),
        Command::Sweep {
            network,
            beta_range,
            out,
            fixed_h,
            candidates,
        } => {
            let betas = commands::parse_beta_range(beta_range)?;
            let csv = commands::sweep(
                &load_network(network)?,
                &betas,
                *fixed_h,
                &solver,
                *candidates,
            )?;
            match out {
                Some(path) => {
                    fs::write(path, &csv).map_err(|e| {
                        CliError::Validation(format!("{}: cannot write: {e}", path.display()))
                    })?;
                    Ok(String::new())
                }
                None => Ok(csv),
            }
        }
    }
}

/// Parses `argv`, runs the command and prints; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if informational { 0 } else { 1 };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
