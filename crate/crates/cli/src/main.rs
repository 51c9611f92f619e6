use clap::Parser;
use sharedpilot_cli::commands::{execute, Cli};

fn main() {
    std::process::exit(execute(Cli::parse()));
}
