mod args;
mod commands;
mod config;
mod emit;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config::resolve(&cli.command) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match commands::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let out = cfg.out.as_deref().map(Path::new);
    let written = emit::render(&outcome.artifact, &cfg).and_then(|text| emit::write(&text, out));
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    match out {
        Some(_) => println!("{}", outcome.summary),
        None => eprintln!("{}", outcome.summary),
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
