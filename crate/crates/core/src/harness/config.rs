//! Experiment configuration: the JSON file layout, frozen pass/fail
//! constants and the mapping onto a solver configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::flux::FluxSpec;
use crate::noise::NoiseSpec;
use crate::solver::{hex_digest, GridSpec, InitialData, SolverConfig, SolverSpec};

/// Per-scenario constants for the pass/fail decisions. Absent bounds are
/// reported but not enforced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    /// C in the contraction slack C·dt.
    #[serde(default)]
    pub contraction_slack: f64,
    /// C in the energy slack C·dt.
    #[serde(default)]
    pub energy_slack: f64,
    /// Bound on E sup_t ‖u(t)‖₄⁴.
    #[serde(default)]
    pub moment_bound: Option<f64>,
    /// Bound on E m(T^N×[0,T]×R).
    #[serde(default)]
    pub measure_mass_bound: Option<f64>,
    /// Bound on E ∫ξ² dm.
    #[serde(default)]
    pub measure_xi2_bound: Option<f64>,
    /// Bound on E (∫ξ² dm)².
    #[serde(default)]
    pub measure_xi2_sq_bound: Option<f64>,
    /// Upper bound on the fitted regularity envelope constant.
    #[serde(default)]
    pub regularity_c_max: Option<f64>,
    /// Number of uniform time samples used by the time-resolved experiments.
    #[serde(default = "default_samples")]
    pub time_samples: usize,
}

fn default_samples() -> usize {
    16
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            contraction_slack: 0.0,
            energy_slack: 0.0,
            moment_bound: None,
            measure_mass_bound: None,
            measure_xi2_bound: None,
            measure_xi2_sq_bound: None,
            regularity_c_max: None,
            time_samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_scenario")]
    pub scenario: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub flux: FluxSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub solver: SolverSpec,
    pub initial: InitialData,
    /// Second initial datum of the contraction experiment.
    #[serde(default)]
    pub initial_pair: Option<InitialData>,
    #[serde(default = "default_paths")]
    pub ensemble_size: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Viscosities of the convergence experiment; each rung should halve
    /// the previous one.
    #[serde(default)]
    pub eta_ladder: Vec<f64>,
    /// Regularity exponent; derived from α when absent.
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Hölder exponent of the noise modulus; overrides the noise block.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub checks: Checks,
}

fn default_scenario() -> String {
    "default".into()
}
fn default_paths() -> usize {
    64
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// σ = min(2α/(1+α), 1/2).
pub fn regularity_sigma(alpha: f64) -> f64 {
    (2.0 * alpha / (1.0 + alpha)).min(0.5)
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(KinError::InvalidConfig(
                "ensemble_size must be positive".into(),
            ));
        }
        if self.checks.time_samples == 0 {
            return Err(KinError::InvalidConfig(
                "time_samples must be positive".into(),
            ));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(KinError::InvalidConfig(format!(
                    "alpha must lie in (0,1], got {a}"
                )));
            }
        }
        self.solver_config()?;
        Ok(())
    }

    /// Noise block with the top-level α applied.
    pub fn noise_spec(&self) -> NoiseSpec {
        let mut n = self.noise.clone();
        if let Some(a) = self.alpha {
            n.alpha = a;
        }
        n
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        self.solver_config_with(self.initial.clone())
    }

    pub fn solver_config_with(&self, initial: InitialData) -> Result<SolverConfig> {
        SolverConfig::from_specs(
            &self.grid,
            &self.flux,
            &self.noise_spec(),
            initial,
            &self.solver,
        )
    }

    pub fn sigma(&self) -> Result<f64> {
        Ok(match self.sigma {
            Some(s) => s,
            None => regularity_sigma(self.solver_config()?.noise.alpha),
        })
    }

    /// SHA-256 of the compact JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        hex_digest(
            serde_json::to_string(self)
                .expect("config serializes")
                .as_bytes(),
        )
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let s = std::fs::read_to_string(path)?;
    ExperimentConfig::from_json(&s)
}
