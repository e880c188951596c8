use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IRSDM_LOG", "warn")).init();
    let cli = irsdm_cli::Cli::parse();
    if let Err(e) = irsdm_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
