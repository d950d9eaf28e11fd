//! Artifact files: `report.json`, `profile.csv` and `plotdata.csv`.
//!
//! Everything that may differ between two runs with the same configuration
//! lives in the `header` object of `report.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

/// A CSV table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Full-precision float cell.
pub fn num(x: f64) -> String {
    format!("{x:.17e}")
}

pub struct Outcome {
    pub verdict: String,
    /// Resolved parameters, defaults included.
    pub parameters: Value,
    pub report: Value,
    pub profile: Table,
    pub plot: Vec<PlotPoint>,
}

fn header(command: &str, cfg: &RunConfig) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "timestamp_unix": timestamp,
        "seed": cfg.seed,
        "command": command,
        "argv": std::env::args().collect::<Vec<_>>(),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn write_json(dir: &Path, doc: &Value) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn csv(command: &str, seed: u64, table: &Table) -> String {
    let mut s = format!("# command={command} seed={seed}\n");
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn write(command: &str, cfg: &RunConfig, outcome: &Outcome) -> Result<PathBuf> {
    let doc = json!({
        "header": header(command, cfg),
        "command": command,
        "seed": cfg.seed,
        "status": "ok",
        "verdict": outcome.verdict,
        "parameters": outcome.parameters,
        "report": outcome.report,
    });
    let path = write_json(&cfg.out, &doc)?;
    fs::write(cfg.out.join("profile.csv"), csv(command, cfg.seed, &outcome.profile))?;
    if !outcome.plot.is_empty() {
        let mut s = format!("# command={command} seed={}\nx,y,series\n", cfg.seed);
        for p in &outcome.plot {
            let _ = writeln!(s, "{},{},{}", num(p.x), num(p.y), p.series);
        }
        fs::write(cfg.out.join("plotdata.csv"), s)?;
    }
    Ok(path)
}

pub fn write_failure(command: &str, cfg: &RunConfig, message: &str) -> Result<PathBuf> {
    let doc = json!({
        "header": header(command, cfg),
        "command": command,
        "seed": cfg.seed,
        "status": "hypothesis_failed",
        "verdict": "hypothesis not met",
        "message": message,
    });
    write_json(&cfg.out, &doc)
}
