use clap::Parser;

fn main() {
    let cli = depthforge_cli::Cli::parse();
    if let Err(e) = depthforge_cli::run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
