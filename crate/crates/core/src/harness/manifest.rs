//! Run manifests and the derivation of per-path seeds.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

/// First 8 bytes (little endian) of SHA-256(master_seed LE ‖ i LE).
pub fn path_seed(master_seed: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

pub fn path_seeds(master_seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| path_seed(master_seed, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub scenario: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub code_version: String,
    pub path_seeds: Vec<u64>,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub output_files: Vec<String>,
    pub status: RunStatus,
    pub pass: Option<bool>,
    pub error: Option<String>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}

impl RunManifest {
    pub fn begin(experiment: &str, cfg: &ExperimentConfig, threads: usize) -> Self {
        Self {
            experiment: experiment.into(),
            scenario: cfg.scenario.clone(),
            config_hash: cfg.hash(),
            master_seed: cfg.master_seed,
            code_version: env!("CARGO_PKG_VERSION").into(),
            path_seeds: path_seeds(cfg.master_seed, cfg.ensemble_size),
            threads,
            started_at: now(),
            finished_at: None,
            output_files: vec![],
            status: RunStatus::Running,
            pass: None,
            error: None,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}_manifest.json", self.experiment)
    }

    /// Writes `<dir>/<experiment>_manifest.json`, creating `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    pub fn complete(&mut self, pass: bool, files: Vec<String>) {
        self.status = RunStatus::Completed;
        self.pass = Some(pass);
        self.output_files = files;
        self.finished_at = Some(now());
    }

    pub fn fail(&mut self, err: &str) {
        self.status = RunStatus::Failed;
        self.error = Some(err.into());
        self.finished_at = Some(now());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_hashes() {
        let expected = {
            let mut bytes = Vec::new();
            bytes.extend_from_slice(&7u64.to_le_bytes());
            bytes.extend_from_slice(&3u64.to_le_bytes());
            let d = Sha256::digest(&bytes);
            u64::from_le_bytes(d[..8].try_into().unwrap())
        };
        assert_eq!(path_seed(7, 3), expected);
        let s = path_seeds(7, 5);
        assert_eq!(s.len(), 5);
        assert_eq!(s[3], expected);
        assert_ne!(path_seed(7, 0), path_seed(8, 0));
    }
}
