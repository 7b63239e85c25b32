mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Geometrically exact Timoshenko beam solver.
#[derive(Parser, Debug)]
#[command(name = "timoshenko", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Output directory; defaults to `output.directory` of the config, then `out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for the randomized checks.
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time integration: trajectory, energy ledger and closure residuals.
    Simulate {
        /// Config file or preset name.
        config: String,
        #[command(flatten)]
        common: Common,
    },
    /// Static profiles by marching or shooting, with the reconstructed centerline.
    Static {
        config: String,
        #[command(flatten)]
        common: Common,
    },
    /// Rigid spin against the Euler equations of the rigid body.
    Rigid {
        config: String,
        #[command(flatten)]
        common: Common,
    },
    /// Property suite: so3, energy, hamilton-equivalence, bracket, action, closure or all.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, common } => commands::simulate(&config, common.out.as_deref()),
        Command::Static { config, common } => commands::statics(&config, common.out.as_deref()),
        Command::Rigid { config, common } => commands::rigid(&config, common.out.as_deref()),
        Command::Verify { suite, common } => verify::run(&suite, common.seed, common.out.as_deref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
