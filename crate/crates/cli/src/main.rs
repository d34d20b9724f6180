mod args;
mod commands;
mod error;
mod inputs;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let flags = cli.flags.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    match flags.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be >= 1".into())),
        Some(n) => pool = pool.num_threads(n),
        None => {}
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Analyze => commands::analyze(&flags),
        Command::Landscape => commands::landscape(&flags),
        Command::Simulate => commands::simulate(&flags),
        Command::ShuffleTest => commands::shuffle_test(&flags),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("volret: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
