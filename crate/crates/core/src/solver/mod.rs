//! Euler–Maruyama time stepping of the viscous stochastic conservation law
//! du + div A(u) dt - η Δu dt = Σ_k g_k(x,u) dβ_k with energy and moment
//! ledgers and on-the-fly accumulation of the kinetic measure.

mod initial;
mod run;
mod scheme;

pub use initial::{InitialData, TrigTerm};
pub use run::{
    energy_check, energy_margins, moment_check, run_path, run_path_with_history, EnergyRecord,
    EnergyReport, MomentReport, PathHistory, PathRun, Snapshot,
};
pub use scheme::{monotone_cfl_limit, stable_dt, step, StepWorkspace};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{KinError, Result};
use crate::flux::{FluxModel, FluxSpec};
use crate::grid::{GridField, TorusGrid};
use crate::noise::{NoiseModel, NoiseSpec};

/// Solver block of the JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub eta: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Bound on |u| used for the time step; estimated when absent.
    #[serde(default)]
    pub u_bound: Option<f64>,
    /// Number of base steps before dyadic refinement; derived from the
    /// stability limit when absent.
    #[serde(default)]
    pub base_steps: Option<usize>,
    #[serde(default)]
    pub refine_level: u32,
    #[serde(default = "default_xi_bins")]
    pub xi_bins: usize,
    #[serde(default = "default_t_bins")]
    pub t_bins: usize,
    /// Fixed ξ bin width; overrides `xi_bins` when set.
    #[serde(default)]
    pub xi_dxi: Option<f64>,
    #[serde(default = "default_true")]
    pub record_kinetic: bool,
    #[serde(default = "default_powers")]
    pub moment_powers: Vec<f64>,
}

fn default_cfl() -> f64 {
    0.4
}
fn default_xi_bins() -> usize {
    64
}
fn default_t_bins() -> usize {
    32
}
fn default_true() -> bool {
    true
}
fn default_powers() -> Vec<f64> {
    vec![2.0, 4.0]
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            eta: 0.01,
            t_end: 0.5,
            cfl_safety: default_cfl(),
            snapshots: vec![],
            u_bound: None,
            base_steps: None,
            refine_level: 0,
            xi_bins: default_xi_bins(),
            t_bins: default_t_bins(),
            xi_dxi: None,
            record_kinetic: true,
            moment_powers: default_powers(),
        }
    }
}

/// Grid block of the JSON configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub n: usize,
}

fn default_dim() -> usize {
    1
}

/// Everything that determines a path besides its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: TorusGrid,
    pub flux: FluxModel,
    pub noise: NoiseModel,
    pub initial: InitialData,
    pub eta: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub snapshot_times: Vec<f64>,
    pub u_bound: Option<f64>,
    pub base_steps: Option<usize>,
    pub refine_level: u32,
    pub xi_bins: usize,
    pub t_bins: usize,
    pub xi_dxi: Option<f64>,
    pub record_kinetic: bool,
    pub moment_powers: Vec<f64>,
}

impl SolverConfig {
    pub fn new(
        grid: TorusGrid,
        flux: FluxModel,
        noise: NoiseModel,
        initial: InitialData,
        eta: f64,
        t_end: f64,
    ) -> Result<Self> {
        let s = SolverSpec {
            eta,
            t_end,
            ..Default::default()
        };
        Self::from_parts(grid, flux, noise, initial, &s)
    }

    pub fn from_parts(
        grid: TorusGrid,
        flux: FluxModel,
        noise: NoiseModel,
        initial: InitialData,
        s: &SolverSpec,
    ) -> Result<Self> {
        let cfg = Self {
            grid,
            flux,
            noise,
            initial,
            eta: s.eta,
            t_end: s.t_end,
            cfl_safety: s.cfl_safety,
            snapshot_times: s.snapshots.clone(),
            u_bound: s.u_bound,
            base_steps: s.base_steps,
            refine_level: s.refine_level,
            xi_bins: s.xi_bins,
            t_bins: s.t_bins,
            xi_dxi: s.xi_dxi,
            record_kinetic: s.record_kinetic,
            moment_powers: s.moment_powers.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_specs(
        grid: &GridSpec,
        flux: &FluxSpec,
        noise: &NoiseSpec,
        initial: InitialData,
        s: &SolverSpec,
    ) -> Result<Self> {
        let g = TorusGrid::new(grid.dim, grid.n)?;
        let f = FluxModel::from_spec(flux, grid.dim)?;
        let nm = NoiseModel::from_spec(noise, grid.dim)?;
        Self::from_parts(g, f, nm, initial, s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(KinError::InvalidConfig(format!(
                "eta must be nonnegative, got {}",
                self.eta
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(KinError::InvalidConfig(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(KinError::InvalidConfig(format!(
                "cfl_safety must lie in (0,1), got {}",
                self.cfl_safety
            )));
        }
        if self
            .snapshot_times
            .iter()
            .any(|t| !(*t >= 0.0 && *t <= self.t_end))
        {
            return Err(KinError::InvalidConfig(
                "snapshot times must lie in [0, t_end]".into(),
            ));
        }
        if self.noise.dim != self.grid.dim() || self.flux.dim != self.grid.dim() {
            return Err(KinError::InvalidConfig(
                "grid, flux and noise dimensions differ".into(),
            ));
        }
        if self.t_bins == 0 || self.xi_bins == 0 {
            return Err(KinError::InvalidConfig(
                "t_bins and xi_bins must be positive".into(),
            ));
        }
        if self.cfl_safety > monotone_cfl_limit(self.grid.dim()) {
            log::warn!(
                "cfl_safety {} exceeds the monotonicity limit {:.4}",
                self.cfl_safety,
                monotone_cfl_limit(self.grid.dim())
            );
        }
        Ok(())
    }

    pub fn initial_field(&self) -> Result<GridField> {
        self.initial.field(self.grid)
    }

    /// Bound on |u| used by the time-step rule: max|u₀| for deterministic
    /// runs, max|u₀| + 4√(D0·T·(1+max|u₀|²)) with noise.
    pub fn effective_u_bound(&self) -> Result<f64> {
        if let Some(b) = self.u_bound {
            return Ok(b);
        }
        let m = self.initial_field()?.max_abs();
        if self.noise.is_zero() {
            Ok(m)
        } else {
            Ok(m + 4.0 * (self.noise.d0 * self.t_end * (1.0 + m * m)).sqrt())
        }
    }

    /// Base step count ⌈T / dt_stable⌉ unless fixed in the config.
    pub fn base_step_count(&self) -> Result<usize> {
        if let Some(s) = self.base_steps {
            return Ok(s.max(1));
        }
        let dt = stable_dt(self, self.effective_u_bound()?);
        Ok((self.t_end / dt).ceil().max(1.0) as usize)
    }

    pub fn step_count(&self) -> Result<usize> {
        Ok(self.base_step_count()? << self.refine_level)
    }

    pub fn dt(&self) -> Result<f64> {
        Ok(self.t_end / self.step_count()? as f64)
    }

    /// Grid-Péclet ratio η / (dx·max|a|); below 1 the scheme's own
    /// diffusion dominates.
    pub fn peclet_ratio(&self) -> Result<f64> {
        let a = self.flux.max_speed(self.effective_u_bound()?);
        Ok(if a == 0.0 {
            f64::INFINITY
        } else {
            self.eta / (self.grid.dx() * a)
        })
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded.
    pub fn hash(&self) -> String {
        let s = serde_json::to_string(self).expect("config serializes");
        hex_digest(s.as_bytes())
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_block_defaults() {
        let s: SolverSpec = serde_json::from_str(r#"{"eta":0.02,"t_end":0.5}"#).unwrap();
        assert_eq!(s.cfl_safety, 0.4);
        assert_eq!(s.refine_level, 0);
        let g = GridSpec { dim: 1, n: 32 };
        let cfg = SolverConfig::from_specs(
            &g,
            &FluxSpec::default(),
            &NoiseSpec::default(),
            InitialData::Constant { c: 1.0 },
            &s,
        )
        .unwrap();
        assert_eq!(cfg.hash(), cfg.clone().hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_values() {
        let g = TorusGrid::new(1, 16).unwrap();
        let f = FluxModel::burgers(1);
        let n = NoiseModel::zero(1);
        assert!(
            SolverConfig::new(g, f, n.clone(), InitialData::Constant { c: 0.0 }, -1.0, 1.0)
                .is_err()
        );
        assert!(SolverConfig::new(g, f, n, InitialData::Constant { c: 0.0 }, 0.1, 0.0).is_err());
    }

    #[test]
    fn refinement_halves_dt() {
        let g = TorusGrid::new(1, 32).unwrap();
        let mut cfg = SolverConfig::new(
            g,
            FluxModel::burgers(1),
            NoiseModel::zero(1),
            InitialData::Constant { c: 1.0 },
            0.01,
            0.5,
        )
        .unwrap();
        let dt0 = cfg.dt().unwrap();
        cfg.refine_level = 1;
        assert!((cfg.dt().unwrap() - dt0 / 2.0).abs() < 1e-15);
    }
}
