//! Experiment harness: reads one JSON configuration, runs a command, writes
//! reports and tables.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{Experiment, ExperimentConfig, Overrides};
pub use error::CliError;

/// Environment variable capping the worker threads. Results never depend on it.
pub const THREADS_VAR: &str = "GWF_LAB_THREADS";

/// Sizes the global thread pool from [`THREADS_VAR`] when it is set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "{THREADS_VAR} must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}
