//! `graphforge` command-line entry point.
//!
//! Exit codes: 0 success, 1 validation mismatch, 2 invalid arguments,
//! 3 data or IO error, 4 construction error.

mod args;
mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli, std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
