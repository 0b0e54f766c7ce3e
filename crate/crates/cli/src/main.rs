use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use oppspec_cli::{run, Command, RunConfig};

/// Opportunistic spectrum access: fit, analyze, optimize, simulate, sweep.
#[derive(Debug, Parser)]
#[command(name = "oppspec", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = RunConfig::load(&args.config).and_then(|mut cfg| {
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
        let out = args
            .out
            .clone()
            .unwrap_or_else(|| base.join(&cfg.output_dir));
        run(args.command, &cfg, &base, &out)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::FAILURE
        }
    }
}
