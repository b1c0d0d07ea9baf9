use clap::Parser;

fn main() {
    let config = blr_cli::RunConfig::parse();
    std::process::exit(blr_cli::main_with(&config));
}
