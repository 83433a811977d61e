mod args;
mod commands;
mod error;
mod manifest;
mod sweep;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::exit;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    let result = match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Verify { out } => commands::verify(&out),
        Command::Sweep { sweep, out, overrides } => sweep::run(&sweep, &out, &overrides),
        Command::Validate { scenario, overrides } => commands::validate(&scenario, &overrides),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
