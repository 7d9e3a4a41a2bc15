//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// A numeric table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }

    /// Comma separated, LF terminated, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_number(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Ok,
    Failed,
}

/// Everything needed to repeat a run, plus checksums of what it wrote.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub seed: u64,
    pub params: Value,
    pub tool_version: String,
    pub jobs: usize,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub status: RunStatus,
    pub outputs: Vec<OutputEntry>,
    #[serde(default)]
    pub errors: Vec<String>,
    #[serde(default)]
    pub checks: Value,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl Manifest {
    pub fn start(scenario: &str, seed: u64, params: Value, jobs: usize) -> Self {
        Self {
            scenario: scenario.to_string(),
            seed,
            params,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            jobs,
            started_at: now(),
            finished_at: None,
            status: RunStatus::Running,
            outputs: Vec::new(),
            errors: Vec::new(),
            checks: Value::Null,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn finish(&mut self, status: RunStatus) {
        self.status = status;
        self.finished_at = Some(now());
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Writes `table` as `<dir>/<name>.csv` and returns its manifest entry.
pub fn write_table(dir: &Path, table: &Table) -> Result<OutputEntry> {
    let file = format!("{}.csv", table.name);
    let text = table.to_csv();
    fs::write(dir.join(&file), &text)?;
    Ok(OutputEntry { file, sha256: hex::encode(Sha256::digest(text.as_bytes())), rows: table.rows.len() })
}
