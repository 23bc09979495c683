//! CSV tables and per-path checkpoints.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::grid::TorusGrid;
use crate::solver::{EnergyRecord, PathRun, Snapshot};

/// Numeric table with a header row; values are written in shortest
/// round-trip form so files are bitwise reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(KinError::Invalid(format!(
                "row has {} entries, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    table.write_csv(std::fs::File::create(path)?)
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Resumable record of one finished path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCheckpoint {
    pub version: u32,
    pub grid: TorusGrid,
    pub config_hash: String,
    pub path_seed: u64,
    pub snapshots: Vec<Snapshot>,
    pub ledger: Vec<EnergyRecord>,
}

impl PathCheckpoint {
    pub fn from_run(run: &PathRun) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            grid: run.final_field().grid,
            config_hash: run.config_hash.clone(),
            path_seed: run.path_seed,
            snapshots: run.snapshots.clone(),
            ledger: run.ledger.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    /// Loads a checkpoint and rejects foreign versions or configs.
    pub fn load(path: &Path, config_hash: &str) -> Result<Self> {
        let c: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        if c.version != CHECKPOINT_VERSION {
            return Err(KinError::Incompatible(format!(
                "checkpoint version {} (expected {CHECKPOINT_VERSION})",
                c.version
            )));
        }
        if c.config_hash != config_hash {
            return Err(KinError::Incompatible(
                "checkpoint belongs to a different config".into(),
            ));
        }
        Ok(c)
    }
}
