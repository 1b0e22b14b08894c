//! Experiment harness: JSON configs in, CSV tables with JSON sidecars out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

use deepmix_core::Limits;

pub use config::{ExperimentConfig, ExperimentKind, Parameters};
pub use error::{HarnessError, Result};
pub use experiments::run_experiment;
pub use table::{write_csv, Cell, ResultTable, Sidecar};

/// Runs `config` on a dedicated pool of `config.threads` workers.
pub fn run_with_threads(config: &ExperimentConfig, limits: &Limits) -> Result<Vec<ResultTable>> {
    // fail fast, before spinning up workers
    config.validate(limits)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("threads: {e}")))?;
    pool.install(|| run_experiment(config, limits))
}

/// Runs `config` and writes every table into `out_dir`. Returns the CSV paths.
pub fn execute(config: &ExperimentConfig, out_dir: &Path, limits: &Limits) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    let tables = run_with_threads(config, limits)?;
    let wall = start.elapsed().as_secs_f64();
    let echo = config.to_json_value();
    tables
        .iter()
        .map(|t| {
            let sidecar = Sidecar {
                experiment: &t.experiment,
                table: &t.name,
                columns: &t.columns,
                n_rows: t.rows.len(),
                master_seed: config.master_seed,
                threads: config.threads,
                version: table::version_string(),
                wall_time_s: wall,
                config: &echo,
            };
            write_csv(t, out_dir, &sidecar)
        })
        .collect()
}
