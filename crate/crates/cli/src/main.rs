//! `nagaoka`: exact diagonalization of single-hole Hubbard models from the
//! command line.
//!
//! Exit status is 0 on success, 1 for bad input (including usage errors and
//! missing files) and 2 for numerical failures or a failing acceptance run.

mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// A failure that maps to exit status 2 without being a core error.
#[derive(Debug)]
pub struct AcceptanceFailed(pub usize);

impl std::fmt::Display for AcceptanceFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} acceptance criteria failed", self.0)
    }
}

impl std::error::Error for AcceptanceFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<AcceptanceFailed>().is_some() {
        return 2;
    }
    match err.downcast_ref::<nagaoka_core::Error>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
