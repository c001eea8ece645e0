use clap::Parser;

fn main() {
    let cli = ipe_cli::Cli::parse();
    std::process::exit(ipe_cli::run(cli));
}
