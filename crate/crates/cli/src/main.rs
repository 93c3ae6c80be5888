use std::process::ExitCode;

use clap::Parser;
use kfrisk_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match kfrisk_cli::run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
