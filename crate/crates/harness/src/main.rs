use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use deepmix::{execute, ExperimentConfig, ExperimentKind, HarnessError};
use deepmix_core::Limits;

/// Projected-ensemble experiments for mixed initial states.
#[derive(Debug, Parser)]
#[command(name = "deepmix", version)]
struct Cli {
    /// fig1b, dynamics, selfdual, scrooge_check, ghse_check, mc_ref_check or concentration_scan
    experiment: String,
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides `master_seed`)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides `threads`)
    #[arg(long, env = "DEEPMIX_THREADS")]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, HarnessError> {
    let kind: ExperimentKind = cli.experiment.parse()?;
    let mut config = ExperimentConfig::from_path(&cli.config)?;
    if config.experiment != kind {
        return Err(HarnessError::Config(format!(
            "experiment: command line asks for {kind} but the config describes {}",
            config.experiment
        )));
    }
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    let out = config.output_dir.clone();
    execute(&config, &out, &Limits::default())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("deepmix: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
