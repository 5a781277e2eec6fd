use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use morawetz_lab::commands::{self, Context, Outcome};
use morawetz_lab::error::EXIT_VERDICT;
use morawetz_lab::scenario::load_scenario;
use morawetz_lab::{LabError, LabResult};

#[derive(Parser, Debug)]
#[command(name = "morawetz-lab", version, about = "Damped NLS experiments on warped and radial manifolds")]
struct Cli {
    /// Scenario TOML file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory for all outputs.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the solver and write diagnostics and snapshots.
    Simulate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the geometric assumptions and the boundary condition.
    CheckAssumptions {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace geodesics and compare exit times with the escape bound.
    Geodesics {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiplier identity residuals under grid refinement.
    IdentityCheck {
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exponential decay fit, optionally over several amplitudes.
    Decay {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        sweep_amplitudes: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-integrated Morawetz quantities over growing horizons.
    Morawetz {
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        horizons: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate once per value of a scenario key.
    Sweep {
        /// Dotted key, e.g. `damping.a0`.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> LabResult<Outcome> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| LabError::Runtime(e.to_string()))?;
    }
    let path = cli.scenario.ok_or_else(|| LabError::Config("--scenario is required".into()))?;
    let mut scenario = load_scenario(&path)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
        scenario.validate()?;
    }
    let ctx = Context { scenario, out_dir: cli.out_dir, quiet: cli.quiet };
    match &cli.command {
        Command::Simulate { out } => commands::simulate(&ctx, out.as_deref()),
        Command::CheckAssumptions { out } => commands::check_assumptions(&ctx, out.as_deref()),
        Command::Geodesics { out } => commands::geodesics(&ctx, out.as_deref()),
        Command::IdentityCheck { levels, out } => commands::identity_check(&ctx, *levels, out.as_deref()),
        Command::Decay { sweep_amplitudes, out } => commands::decay(&ctx, sweep_amplitudes.as_deref(), out.as_deref()),
        Command::Morawetz { horizons, out } => commands::morawetz(&ctx, horizons.as_deref(), out.as_deref()),
        Command::Sweep { param, values, out } => commands::sweep(&ctx, param, values, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    match run(cli) {
        Ok(outcome) => {
            if !quiet {
                for f in &outcome.files {
                    println!("{}", f.display());
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERDICT as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
