use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = nlnls_cli::Cli::parse();
    std::process::exit(nlnls_cli::run(cli));
}
