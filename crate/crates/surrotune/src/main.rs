use clap::Parser;

fn main() {
    let cli = surrotune::cli::Cli::parse();
    if let Err(e) = surrotune::cli::run(cli) {
        eprintln!("error[{}]: {e}", e.category());
        std::process::exit(1);
    }
}
