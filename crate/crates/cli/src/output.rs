//! CSV tables and the run manifest.
//!
//! Floats are written with 17 significant digits so every value round-trips
//! exactly; lines end in LF.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;

/// Column name and unit, in output order.
pub type Schema = &'static [(&'static str, &'static str)];

pub const STERN_GERLACH: Schema = &[
    ("u_mean", "energy (config units)"),
    ("d_mean", "energy (config units)"),
    ("t", "time"),
    ("samples", "count"),
    ("mc_mean", "probability"),
    ("mc_stderr", "probability"),
    ("analytic_paper", "probability"),
    ("analytic_exact", "probability"),
];

pub const VISIBILITY: Schema = &[
    ("a", "radian"),
    ("u_mean", "energy (config units)"),
    ("d_mean", "energy (config units)"),
    ("t", "time"),
    ("mean_cos_paper", "dimensionless"),
    ("mean_cos_exact", "dimensionless"),
    ("mc_mean", "dimensionless"),
    ("mc_stderr", "dimensionless"),
];

pub const ENVIRONMENT: Schema = &[
    ("K", "count"),
    ("t", "time"),
    ("exact_prob", "probability"),
    ("mc_prob", "probability"),
    ("abs_deviation", "probability"),
    ("coherence", "dimensionless"),
];

pub const SCALING: Schema = &[
    ("n_spins", "count"),
    ("dim", "count"),
    ("param_count", "count"),
    ("backend", "label"),
    ("matvec_count", "operator rows applied"),
    ("wall_time_s", "second"),
    ("peak_state_bytes", "byte"),
];

/// A single CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, schema: Schema, rows: &[Vec<Cell>]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(schema.iter().map(|(name, _)| *name))?;
    for row in rows {
        debug_assert_eq!(row.len(), schema.len());
        writer.write_record(row.iter().map(Cell::render))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn units(schema: Schema) -> Value {
    Value::Array(
        schema
            .iter()
            .map(|(name, unit)| serde_json::json!({ "name": name, "unit": unit }))
            .collect(),
    )
}
