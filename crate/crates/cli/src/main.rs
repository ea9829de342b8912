use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = vqd_cli::Cli::parse();
    match vqd_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
