use clap::Parser;
use rkcq_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("rkcq: {e}");
        std::process::exit(e.exit_code());
    }
}
