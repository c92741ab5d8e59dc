use clap::Parser;
use cqlab::commands::{run, EXIT_ERROR};
use cqlab::config::{Cli, RunConfig};

fn main() {
    let cli = Cli::parse();
    let env_out = std::env::var_os("CQLAB_OUT").map(Into::into);
    let code = match RunConfig::from_cli(cli, env_out) {
        Ok(config) => run(&config),
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    };
    std::process::exit(code);
}
