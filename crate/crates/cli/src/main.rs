use clap::Parser;
use slitres_cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SLITRES_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("slitres: {e}");
        std::process::exit(e.exit_code());
    }
}
