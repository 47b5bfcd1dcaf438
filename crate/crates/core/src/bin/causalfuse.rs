use causalfuse::cli::{run, Cli, EXIT_INTERNAL};
use clap::Parser;

fn main() {
    let cli = Cli::parse();
    let code = std::panic::catch_unwind(|| run(cli)).unwrap_or_else(|_| {
        eprintln!("internal error");
        EXIT_INTERNAL
    });
    std::process::exit(code);
}
