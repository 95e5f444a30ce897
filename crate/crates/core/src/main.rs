use std::process::ExitCode;

use clap::Parser;
use elasso::cli::{configure_threads, exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("elasso: {}: {e}", e.kind());
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
