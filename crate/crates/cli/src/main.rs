use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    hisa_cli::run(hisa_cli::Cli::parse())
}
