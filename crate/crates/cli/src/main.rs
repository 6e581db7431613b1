mod args;
mod commands;
mod config;
mod error;
mod plot;

use clap::Parser;

use args::{Cli, Command};
use config::FileConfig;
use error::{CliResult, USAGE};

fn run(cli: &Cli) -> CliResult<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Decompose(a) => commands::decompose(a, &file),
        Command::Dfa(a) => commands::dfa(a, &file),
        Command::Denoise(a) => commands::denoise(a, &file),
        Command::Benchmark(a) => commands::run_benchmark(a, &file),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code);
    }
}
