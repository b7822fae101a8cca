use std::path::PathBuf;
use std::process::ExitCode;

use anisowalk::cli::{error_json, exit_code, load_config, run, Command};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Simulate,
    Spectrum,
    Scatter,
    LimitDist,
    Compare,
    Density,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Scatter => Command::Scatter,
            Cmd::LimitDist => Command::LimitDist,
            Cmd::Compare => Command::Compare,
            Cmd::Density => Command::Density,
        }
    }
}

/// Quantum walks with anisotropic coins: dynamics, scattering and weak limits.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = load_config(&args.config, args.seed).and_then(|cfg| run(args.command.into(), &cfg, &args.out));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for p in &outcome.artifacts {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
