//! Single-path driver, energy/moment ledgers and their ensemble checks.

use serde::{Deserialize, Serialize};

use super::scheme::{step, StepWorkspace};
use super::SolverConfig;
use crate::error::{KinError, Result};
use crate::grid::GridField;
use crate::harness::reduce::Accumulator;
use crate::kinetic::{KineticMeasure, XiGrid};
use crate::noise::refined_increments;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub field: GridField,
}

/// Ledger entry for step n → n+1. Integrands are evaluated at the pre-step
/// state u^n; `l2_sq` and `lp` describe u^{n+1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub l2_sq: f64,
    /// 2η‖∇u^n‖² dt
    pub dissipation: f64,
    /// Σ_k ‖g_k(·,u^n)‖² dt
    pub forcing: f64,
    /// ‖u^{n+1}‖_p^p for each configured power
    pub lp: Vec<f64>,
    /// η ∫ |u^n|^{p-2} |∇u^n|² dx dt for each configured power
    pub lp_dissipation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRun {
    pub config_hash: String,
    pub path_seed: u64,
    pub step_count: usize,
    pub dt_used: f64,
    pub initial_l2_sq: f64,
    pub initial_lp: Vec<f64>,
    pub moment_powers: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub ledger: Vec<EnergyRecord>,
    pub kinetic_measure: Option<KineticMeasure>,
    /// Steps whose monotonicity number exceeded 1.
    pub cfl_violations: usize,
    pub max_monotone_number: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl PathRun {
    pub fn final_field(&self) -> &GridField {
        &self
            .snapshots
            .last()
            .expect("at least the initial snapshot")
            .field
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap())
    }

    /// η Σ_n ‖∇u^n‖² dt, summed independently of the histogram.
    pub fn viscous_dissipation(&self) -> f64 {
        self.ledger.iter().map(|r| 0.5 * r.dissipation).sum()
    }
}

/// Every state u^0..u^S and every increment batch of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathHistory {
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
    pub increments: Vec<Vec<f64>>,
}

impl PathHistory {
    pub fn steps(&self) -> usize {
        self.increments.len()
    }
}

fn snapshot_steps(cfg: &SolverConfig, steps: usize, dt: f64) -> Vec<usize> {
    let mut s: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .map(|t| ((t / dt).round() as usize).min(steps))
        .chain([0, steps])
        .collect();
    s.sort_unstable();
    s.dedup();
    s
}

fn pow_p(v: f64, p: f64) -> f64 {
    if p == 2.0 {
        v * v
    } else if p.fract() == 0.0 && p.abs() < 64.0 {
        v.abs().powi(p as i32)
    } else {
        v.abs().powf(p)
    }
}

/// Deterministic function of (config, seed).
pub fn run_path(cfg: &SolverConfig, path_seed: u64) -> Result<PathRun> {
    run_inner(cfg, path_seed, None)
}

/// [`run_path`] that also keeps every state and increment.
pub fn run_path_with_history(cfg: &SolverConfig, path_seed: u64) -> Result<(PathRun, PathHistory)> {
    let mut h = PathHistory {
        dt: 0.0,
        states: vec![],
        increments: vec![],
    };
    let run = run_inner(cfg, path_seed, Some(&mut h))?;
    Ok((run, h))
}

fn run_inner(
    cfg: &SolverConfig,
    path_seed: u64,
    mut history: Option<&mut PathHistory>,
) -> Result<PathRun> {
    cfg.validate()?;
    let g = cfg.grid;
    let vol = g.cell_volume();
    let dx = g.dx();
    let base_steps = cfg.base_step_count()?;
    let level = cfg.refine_level;
    let sub = 1usize << level;
    let steps = base_steps * sub;
    let dt = cfg.t_end / steps as f64;
    let dt_coarse = dt * sub as f64;
    let u_bound = cfg.effective_u_bound()?;
    let dt_stable = super::stable_dt(cfg, u_bound);
    if dt > dt_stable * (1.0 + 1e-12) {
        return Err(KinError::InvalidConfig(format!(
            "dt = {dt} exceeds the stable step {dt_stable}"
        )));
    }
    let mut u = cfg.initial_field()?;
    let snap_steps = snapshot_steps(cfg, steps, dt);
    let powers = cfg.moment_powers.clone();
    let mut measure = if cfg.record_kinetic {
        let (lo, hi) = (u.min(), u.max());
        let xi = match cfg.xi_dxi {
            Some(d) => XiGrid::with_spacing(lo, hi, d)?,
            None => XiGrid::covering(lo, hi, cfg.xi_bins)?,
        };
        Some(KineticMeasure::new(g.len(), cfg.t_bins, cfg.t_end, xi)?)
    } else {
        None
    };
    let mut ws = StepWorkspace::new(cfg);
    let k = cfg.noise.k();
    let mut block: Vec<Vec<f64>> = Vec::new();
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let mut ledger = Vec::with_capacity(steps);
    let mut grad2 = vec![0.0; g.len()];
    let mut violations = 0;
    let mut max_mono = 0.0f64;
    let (mut u_min, mut u_max) = (u.min(), u.max());
    let initial_l2_sq: f64 = u.values.iter().map(|v| v * v).sum::<f64>() * vol;
    let initial_lp: Vec<f64> = powers
        .iter()
        .map(|&p| u.values.iter().map(|v| pow_p(*v, p)).sum::<f64>() * vol)
        .collect();
    if let Some(h) = history.as_deref_mut() {
        h.dt = dt;
        h.states = Vec::with_capacity(steps + 1);
        h.increments = Vec::with_capacity(steps);
        h.states.push(u.values.clone());
    }
    let mut next_snap = 0;
    for n in 0..steps {
        if snap_steps.get(next_snap) == Some(&n) {
            snapshots.push(Snapshot {
                t: n as f64 * dt,
                step: n,
                field: u.clone(),
            });
            next_snap += 1;
        }
        let t = n as f64 * dt;
        if k > 0 && n % sub == 0 {
            block = refined_increments(&cfg.noise, dt_coarse, level, path_seed, (n / sub) as u64)
                .into_iter()
                .map(|b| b.dbeta)
                .collect();
        }
        let dbeta: &[f64] = if k > 0 { &block[n % sub] } else { &[] };

        // pre-step integrands
        for (i, gsq) in grad2.iter_mut().enumerate() {
            let mut s = 0.0;
            for axis in 0..g.dim() {
                let d =
                    (u.values[g.shift(i, axis, 1)] - u.values[g.shift(i, axis, -1)]) / (2.0 * dx);
                s += d * d;
            }
            *gsq = s;
        }
        let grad_l2: f64 = grad2.iter().sum::<f64>() * vol;
        let forcing = if k > 0 {
            ws.profiles
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&u.values)
                        .map(|(pi, ui)| {
                            let s = pi * cfg.noise.shape(*ui);
                            s * s
                        })
                        .sum::<f64>()
                })
                .sum::<f64>()
                * vol
                * dt
        } else {
            0.0
        };
        let lp_diss: Vec<f64> = powers
            .iter()
            .map(|&p| {
                cfg.eta
                    * dt
                    * vol
                    * u.values
                        .iter()
                        .zip(&grad2)
                        .map(|(v, gs)| pow_p(*v, p - 2.0) * gs)
                        .sum::<f64>()
            })
            .collect();
        if let Some(m) = measure.as_mut() {
            if cfg.eta > 0.0 {
                for (i, gsq) in grad2.iter().enumerate() {
                    m.deposit(i, t, u.values[i], cfg.eta * gsq * dt * vol);
                }
            }
        }

        let mono = step(&mut u, dt, dbeta, cfg, &mut ws).map_err(|e| KinError::PathBlowup {
            step: n,
            seed: path_seed,
            detail: e.to_string(),
        })?;
        if mono > 1.0 + 1e-12 {
            violations += 1;
        }
        max_mono = max_mono.max(mono);
        u_min = u_min.min(u.min());
        u_max = u_max.max(u.max());
        let l2_sq = u.values.iter().map(|v| v * v).sum::<f64>() * vol;
        let lp = powers
            .iter()
            .map(|&p| u.values.iter().map(|v| pow_p(*v, p)).sum::<f64>() * vol)
            .collect();
        ledger.push(EnergyRecord {
            t: (n + 1) as f64 * dt,
            l2_sq,
            dissipation: 2.0 * cfg.eta * grad_l2 * dt,
            forcing,
            lp,
            lp_dissipation: lp_diss,
        });
        if let Some(h) = history.as_deref_mut() {
            h.states.push(u.values.clone());
            h.increments.push(dbeta.to_vec());
        }
    }
    snapshots.push(Snapshot {
        t: cfg.t_end,
        step: steps,
        field: u,
    });
    if violations > 0 {
        log::warn!("path {path_seed}: {violations} steps exceeded the monotonicity limit (max {max_mono:.3})");
    }
    Ok(PathRun {
        config_hash: cfg.hash(),
        path_seed,
        step_count: steps,
        dt_used: dt,
        initial_l2_sq,
        initial_lp,
        moment_powers: powers,
        snapshots,
        ledger,
        kinetic_measure: measure,
        cfl_violations: violations,
        max_monotone_number: max_mono,
        u_min,
        u_max,
    })
}

/// ‖u(t)‖² + Σ 2η‖∇u‖²dt - ‖u₀‖² - Σ ‖G(u)‖²dt at every snapshot.
pub fn energy_margins(path: &PathRun) -> Vec<(f64, f64)> {
    let mut cum_d = vec![0.0; path.ledger.len() + 1];
    let mut cum_f = vec![0.0; path.ledger.len() + 1];
    for (i, r) in path.ledger.iter().enumerate() {
        cum_d[i + 1] = cum_d[i] + r.dissipation;
        cum_f[i + 1] = cum_f[i] + r.forcing;
    }
    path.snapshots
        .iter()
        .map(|s| {
            let l2 = if s.step == 0 {
                path.initial_l2_sq
            } else {
                path.ledger[s.step - 1].l2_sq
            };
            (s.t, l2 + cum_d[s.step] - path.initial_l2_sq - cum_f[s.step])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub max_mean_margin: f64,
    pub stderr_at_max: f64,
}

/// Ensemble mean and standard error of the energy margin per snapshot.
pub fn energy_check(paths: &[PathRun]) -> Result<EnergyReport> {
    let first = paths
        .first()
        .ok_or_else(|| KinError::Invalid("empty ensemble".into()))?;
    let times: Vec<f64> = energy_margins(first).into_iter().map(|(t, _)| t).collect();
    let mut acc = vec![Accumulator::default(); times.len()];
    for p in paths {
        let m = energy_margins(p);
        if m.len() != times.len() {
            return Err(KinError::Incompatible(
                "paths have different snapshot schedules".into(),
            ));
        }
        for (a, (_, v)) in acc.iter_mut().zip(m) {
            a.push(v);
        }
    }
    let mean: Vec<f64> = acc.iter().map(|a| a.mean()).collect();
    let stderr: Vec<f64> = acc.iter().map(|a| a.stderr()).collect();
    let (imax, max_mean_margin) =
        mean.iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
    let stderr_at_max = stderr[imax];
    Ok(EnergyReport {
        times,
        mean,
        stderr,
        max_mean_margin,
        stderr_at_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub p: f64,
    /// E sup_t ‖u(t)‖_p^p
    pub mean_sup_lp: f64,
    pub stderr_sup_lp: f64,
    /// E η ∫∫ |u|^{p-2} |∇u|²
    pub mean_dissipation: f64,
    pub stderr_dissipation: f64,
    pub mean_initial_lp: f64,
}

pub fn moment_check(paths: &[PathRun], p: f64) -> Result<MomentReport> {
    let mut sup = Accumulator::default();
    let mut diss = Accumulator::default();
    let mut init = Accumulator::default();
    for path in paths {
        let j = path
            .moment_powers
            .iter()
            .position(|q| *q == p)
            .ok_or_else(|| KinError::Invalid(format!("power {p} was not recorded")))?;
        let s = path
            .ledger
            .iter()
            .map(|r| r.lp[j])
            .fold(path.initial_lp[j], f64::max);
        sup.push(s);
        diss.push(path.ledger.iter().map(|r| r.lp_dissipation[j]).sum());
        init.push(path.initial_lp[j]);
    }
    if sup.count() == 0 {
        return Err(KinError::Invalid("empty ensemble".into()));
    }
    Ok(MomentReport {
        p,
        mean_sup_lp: sup.mean(),
        stderr_sup_lp: sup.stderr(),
        mean_dissipation: diss.mean(),
        stderr_dissipation: diss.stderr(),
        mean_initial_lp: init.mean(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxModel;
    use crate::grid::TorusGrid;
    use crate::noise::NoiseModel;
    use crate::solver::InitialData;

    fn det_cfg(n: usize) -> SolverConfig {
        let mut c = SolverConfig::new(
            TorusGrid::new(1, n).unwrap(),
            FluxModel::burgers(1),
            NoiseModel::zero(1),
            InitialData::sine(0.5, 0.25),
            0.01,
            0.2,
        )
        .unwrap();
        c.snapshot_times = vec![0.1];
        c
    }

    #[test]
    fn deterministic_and_ledger_length() {
        let c = det_cfg(32);
        let a = run_path(&c, 1).unwrap();
        let b = run_path(&c, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ledger.len(), a.step_count);
        assert_eq!(a.snapshots.len(), 3);
        assert!(a
            .ledger
            .iter()
            .all(|r| r.dissipation >= 0.0 && r.l2_sq.is_finite()));
    }

    #[test]
    fn zero_noise_conserves_mass_and_range() {
        let c = det_cfg(64);
        let run = run_path(&c, 0).unwrap();
        let u0 = c.initial_field().unwrap();
        let m0 = u0.integral();
        for s in &run.snapshots {
            assert!((s.field.integral() - m0).abs() < 1e-12);
        }
        assert!(run.u_min >= u0.min() - 1e-14 && run.u_max <= u0.max() + 1e-14);
        assert_eq!(run.cfl_violations, 0);
    }

    #[test]
    fn zero_noise_energy_dissipates() {
        let run = run_path(&det_cfg(64), 0).unwrap();
        for (t, m) in energy_margins(&run) {
            assert!(m <= 1e-14, "t={t} margin={m}");
        }
        assert_eq!(energy_margins(&run)[0].1, 0.0);
    }

    #[test]
    fn kinetic_mass_identity() {
        let run = run_path(&det_cfg(64), 0).unwrap();
        let m = run.kinetic_measure.as_ref().unwrap();
        let direct = run.viscous_dissipation();
        assert!((m.total_mass - direct).abs() <= 1e-12 * direct);
        assert!((m.sum_weights() - direct).abs() <= 1e-12 * direct);
        assert!(m.min_weight() >= 0.0);
    }

    #[test]
    fn history_matches_run() {
        let mut c = det_cfg(16);
        c.noise = NoiseModel::additive(1, 2, 0.3, 1.0).unwrap();
        let (run, h) = run_path_with_history(&c, 9).unwrap();
        assert_eq!(h.states.len(), run.step_count + 1);
        assert_eq!(h.states.last().unwrap(), &run.final_field().values);
        assert_eq!(run, run_path(&c, 9).unwrap());
    }
}
