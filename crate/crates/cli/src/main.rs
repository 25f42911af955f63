use clap::Parser;
use perc_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("perc: {e}");
        std::process::exit(e.exit_code());
    }
}
