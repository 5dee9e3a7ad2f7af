use clap::Parser;
use hyperperc::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
