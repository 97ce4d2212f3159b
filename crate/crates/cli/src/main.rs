use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod manifest;

use args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for bad invocations, 1 for everything that went wrong while running.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<unitac::Error>() {
        Some(unitac::Error::Usage(_) | unitac::Error::Config(_)) => 2,
        _ if e.downcast_ref::<args::UsageError>().is_some() => 2,
        _ => 1,
    }
}
