//! `hvsim`: command-line front end. Exit status is 0 on success, 1 when a
//! spec fails validation and 2 for any other error.

mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use commands::{run_command, Failure};
use config::{Cli, RunConfig};

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = RunConfig::resolve(cli)?;
    match cfg.threads {
        Some(0) => Err(Failure::Runtime("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Runtime(format!("cannot start thread pool: {e}")))?
            .install(|| run_command(&cfg)),
        None => run_command(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
