use clap::Parser;

fn main() {
    let cli = valuations::cli::Cli::parse();
    std::process::exit(valuations::cli::main_with(&cli));
}
