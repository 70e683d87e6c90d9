use clap::Parser;

fn main() {
    let cli = backaction::cli::Cli::parse();
    if let Err(e) = backaction::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
