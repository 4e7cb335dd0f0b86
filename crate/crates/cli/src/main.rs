use std::process::ExitCode;

use clap::Parser;

mod args;
mod error;
mod output;
mod run;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match run::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("znmap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
