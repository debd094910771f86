//! `kemeny`: stationary quantities, mean first passage times and Kemeny
//! functions of Markov chains and Markov renewal processes, from a JSON spec.

mod analysis;
mod format;
mod input;
mod sim;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kemeny_core::kemeny::DEFAULT_CONSTANCY_TOL;

use crate::analysis::{AnalysisError, Route};
use crate::format::Palette;
use crate::input::{InputError, Loaded};
use crate::sim::{Holding, SimSettings};

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(name = "kemeny", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct Common {
    /// Spec file, or the name of a built-in example
    spec: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Row-sum validation tolerance (overrides the spec file's `tol`)
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Report pi, varpi, lambda, M and the six Kemeny vectors
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Relative tolerance for calling a Kemeny vector constant
        #[arg(long, value_parser = positive, default_value_t = DEFAULT_CONSTANCY_TOL)]
        constancy_tol: f64,
        #[arg(long, value_enum, default_value_t = Route::Direct)]
        route: Route,
    },
    /// Run the invariant battery; exits 1 if any check fails
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = positive, default_value_t = DEFAULT_CONSTANCY_TOL)]
        constancy_tol: f64,
    },
    /// Compare Monte Carlo estimates with analytic values
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Trajectories per first-passage estimate, and embedded-chain steps
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Simulated time for occupancy fractions
        #[arg(long, value_parser = positive, default_value_t = 100_000.0)]
        horizon: f64,
        /// Defaults to the spec file's `seed`, then 42
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Holding::Exponential)]
        holding: Holding,
    },
    /// Print the spec of a built-in example (dtmc2, mrp2, ctmc2, bd3)
    Example { name: String },
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

enum Failure {
    Input(InputError),
    Usage(String),
    Checks,
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

fn computation(loaded: &Loaded, e: kemeny_core::Error) -> Failure {
    Failure::Input(InputError {
        source: loaded.source.clone(),
        line: None,
        category: input::category(&e),
        message: input::describe(&e),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let palette = Palette::detect();
    match cli.command {
        Command::Analyze {
            common,
            constancy_tol,
            route,
        } => {
            let loaded = input::load(&common.spec, common.tol)?;
            let report = analysis::analyze(&loaded, route, constancy_tol).map_err(|e| match e {
                AnalysisError::RouteNeedsGenerator => Failure::Usage(format!(
                    "route `h` needs a continuous-time spec (kind ctmc or bd), got kind {}",
                    loaded.kind.name()
                )),
                AnalysisError::Core(e) => computation(&loaded, e),
            })?;
            match common.format {
                Format::Text => print!("{}", analysis::to_text(&report)),
                Format::Json => print!("{}", analysis::to_json(&report)),
            }
            Ok(())
        }
        Command::Verify {
            common,
            constancy_tol,
        } => {
            let loaded = input::load(&common.spec, common.tol)?;
            let checks =
                verify::battery(&loaded, constancy_tol).map_err(|e| computation(&loaded, e))?;
            match common.format {
                Format::Text => print!("{}", verify::to_text(&loaded.source, &checks, palette)),
                Format::Json => print!("{}", verify::to_json(&loaded.source, &checks)),
            }
            if checks.iter().all(|c| c.pass) {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Simulate {
            common,
            trials,
            horizon,
            seed,
            holding,
        } => {
            let loaded = input::load(&common.spec, common.tol)?;
            let settings = SimSettings {
                trials,
                horizon,
                seed: seed.or(loaded.seed).unwrap_or(DEFAULT_SEED),
                holding,
            };
            let report = sim::run(&loaded, &settings).map_err(|e| computation(&loaded, e))?;
            match common.format {
                Format::Text => print!("{}", sim::to_text(&report, palette)),
                Format::Json => print!("{}", sim::to_json(&report)),
            }
            Ok(())
        }
        Command::Example { name } => match input::builtin(&name) {
            Some(text) => {
                print!("{text}");
                Ok(())
            }
            None => Err(Failure::Usage(format!(
                "unknown example `{name}`; available: {}",
                input::BUILTINS.join(", ")
            ))),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
