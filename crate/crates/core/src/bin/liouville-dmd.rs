use clap::Parser;
use liouville_dmd::cli::{run, Cli};

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("{}: {e}", e.category());
        std::process::exit(e.exit_code());
    }
}
