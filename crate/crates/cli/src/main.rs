//! `lssvr`: fit LS-SVR and epsilon-LS-SVR models from the command line.
//!
//! Exit status: 0 success, 2 I/O, 3 invalid argument, 4 numerical failure.
//! Failures print one line `error[<category>]: <message>` to stderr.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lssvr_core::{Error, ErrorCategory};

use crate::args::{Cli, Command};

fn exit_code(category: ErrorCategory) -> ExitCode {
    match category {
        ErrorCategory::Io => ExitCode::from(2),
        ErrorCategory::InvalidArgument => ExitCode::from(3),
        ErrorCategory::Numerical => ExitCode::from(4),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Posterior(a) => commands::posterior(a),
        Command::GapSweep(a) => commands::gap_sweep(a),
        Command::Predict(a) => commands::predict(a),
        Command::SincDemo(a) => commands::sinc_demo(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return exit_code(ErrorCategory::InvalidArgument);
            }
            // clap lists missing arguments on the lines after the headline
            let rendered = e.to_string();
            let message = rendered
                .lines()
                .map(str::trim)
                .take_while(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            let message = message.strip_prefix("error: ").unwrap_or(&message);
            eprintln!("error[{}]: {message}", ErrorCategory::InvalidArgument);
            return exit_code(ErrorCategory::InvalidArgument);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error[{category}]: {e}");
            exit_code(category)
        }
    }
}
