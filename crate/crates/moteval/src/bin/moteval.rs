use clap::Parser;

fn main() {
    let cli = moteval::cli::Cli::parse();
    std::process::exit(moteval::cli::run(cli));
}
