use clap::Parser;

use degnull::cli::{run, Cli, EXIT_INTERNAL};

fn main() {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("DEGNULL_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not size the worker pool: {e}");
                }
            }
            _ => eprintln!("warning: ignoring DEGNULL_THREADS={n}"),
        }
    }
    let code = std::panic::catch_unwind(|| run(cli)).unwrap_or(EXIT_INTERNAL);
    std::process::exit(code);
}
