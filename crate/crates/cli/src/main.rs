use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = attnae_cli::Cli::parse();
    match attnae_cli::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
