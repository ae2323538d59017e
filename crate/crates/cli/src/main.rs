use clap::Parser;
use permwalk_cli::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(cli) {
        eprintln!("permwalk: {e}");
        std::process::exit(e.exit_code());
    }
}
