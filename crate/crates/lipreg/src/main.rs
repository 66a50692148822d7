use clap::Parser;
use lipreg::cli::{self, Cli};

fn main() {
    let args = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = cli::run(&args, &mut out) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
