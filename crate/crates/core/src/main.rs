use clap::Parser;

fn main() {
    let cli = dcsflow::cli::Cli::parse();
    std::process::exit(dcsflow::cli::run(cli));
}
