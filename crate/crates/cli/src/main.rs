use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = fockbound_cli::Cli::parse();
    match fockbound_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
