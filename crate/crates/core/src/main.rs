use std::process::ExitCode;

use clap::Parser;
use fermion_wedge::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
