use clap::Parser;
use nls_lab::cli::{run, Cli};

fn main() {
    // clap exits with status 2 on malformed arguments.
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("nlslab: {e}");
        std::process::exit(e.exit_code());
    }
}
