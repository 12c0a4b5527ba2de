//! Command-line front end: config loading, experiment runners and artifact
//! emission.

pub mod config;
pub mod output;
pub mod run;

use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

pub use config::{parse_config, parse_config_as, ConfigError, ExperimentConfig, ExperimentKind};
pub use run::{run, RunOutput};

/// Environment variable selecting the worker thread count; unset or `0`
/// means one per core.
pub const THREADS_ENV: &str = "COLLAPSE_SIM_THREADS";

/// Reads and validates a config file. A string `params.spectrum` names a
/// JSON spectrum file, resolved relative to the config's directory and
/// inlined before validation.
pub fn load_config(path: &Path, expected: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut value: Value = serde_json::from_str(&text)
        .with_context(|| format!("malformed config {}", path.display()))?;
    if let Some(Value::String(file)) = value.pointer("/params/spectrum") {
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let spectrum_path = base.join(file);
        let spectrum_text = std::fs::read_to_string(&spectrum_path)
            .with_context(|| format!("reading spectrum {}", spectrum_path.display()))?;
        let spectrum: Value = serde_json::from_str(&spectrum_text)
            .with_context(|| format!("malformed spectrum {}", spectrum_path.display()))?;
        value["params"]["spectrum"] = spectrum;
    }
    let config = parse_config_as(&value.to_string(), expected)
        .with_context(|| format!("in {}", path.display()))?;
    Ok(config)
}

/// Builds the worker pool from [`THREADS_ENV`]. Results do not depend on the
/// thread count.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse::<usize>()
            .with_context(|| format!("{THREADS_ENV} must be a non-negative integer, got {s:?}"))?,
        _ => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?)
}
