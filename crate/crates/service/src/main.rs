use std::process::ExitCode;

use clap::Parser;
use govsheet::cli::{self, Cli};

fn main() -> ExitCode {
    cli::run(Cli::parse())
}
