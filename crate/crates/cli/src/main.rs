use std::process::ExitCode;

use clap::Parser;
use menos_cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
