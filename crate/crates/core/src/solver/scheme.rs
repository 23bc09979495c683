//! Conservative Rusanov flux, centered diffusion and an Euler–Maruyama step.

use super::SolverConfig;
use crate::error::{KinError, Result};
use crate::grid::GridField;

/// Largest cfl_safety for which the step rule guarantees a monotone scheme:
/// Σ_axes (dt/dx·λ + 2ηdt/dx²) ≤ cfl(√N + 1) ≤ 1.
pub fn monotone_cfl_limit(dim: usize) -> f64 {
    1.0 / (1.0 + (dim as f64).sqrt())
}

/// dt = cfl·min(dx/max|a|, dx²/(2Nη)) with |u| ≤ u_bound. When neither
/// constraint is active the hyperbolic rule with unit speed is used.
pub fn stable_dt(cfg: &SolverConfig, u_bound: f64) -> f64 {
    let dx = cfg.grid.dx();
    let a = cfg.flux.max_speed(u_bound);
    let mut dt = f64::INFINITY;
    if a > 0.0 {
        dt = dt.min(dx / a);
    }
    if cfg.eta > 0.0 {
        dt = dt.min(dx * dx / (2.0 * cfg.grid.dim() as f64 * cfg.eta));
    }
    if !dt.is_finite() {
        dt = dx;
    }
    cfg.cfl_safety * dt
}

/// Scratch buffers and tabulated noise profiles for [`step`].
#[derive(Debug, Clone)]
pub struct StepWorkspace {
    pub(crate) profiles: Vec<Vec<f64>>,
    flux_vals: Vec<f64>,
    next: Vec<f64>,
}

impl StepWorkspace {
    pub fn new(cfg: &SolverConfig) -> Self {
        let len = cfg.grid.len();
        Self {
            profiles: cfg.noise.profiles_on(&cfg.grid),
            flux_vals: vec![0.0; len],
            next: vec![0.0; len],
        }
    }
}

/// Advances u by one step in place and returns the monotonicity number
/// max_x Σ_axes (dt/dx·λ + 2ηdt/dx²); values above 1 void the maximum
/// principle for that step.
pub fn step(
    u: &mut GridField,
    dt: f64,
    dbeta: &[f64],
    cfg: &SolverConfig,
    ws: &mut StepWorkspace,
) -> Result<f64> {
    let g = cfg.grid;
    let n = g.len();
    let dx = g.dx();
    let r = dt / dx;
    let nu = cfg.eta * dt / (dx * dx);
    let flux = &cfg.flux;
    for (f, v) in ws.flux_vals.iter_mut().zip(&u.values) {
        *f = flux.profile(*v);
    }
    let mut mono = 0.0f64;
    let vals = &u.values;
    for i in 0..n {
        let ui = vals[i];
        let mut acc = ui;
        let mut local = 0.0;
        for axis in 0..g.dim() {
            let d = flux.direction[axis];
            let ip = g.shift(i, axis, 1);
            let im = g.shift(i, axis, -1);
            let (up, um) = (vals[ip], vals[im]);
            let lp = d.abs() * flux.local_speed(ui, up);
            let lm = d.abs() * flux.local_speed(um, ui);
            let fp = 0.5 * d * (ws.flux_vals[i] + ws.flux_vals[ip]) - 0.5 * lp * (up - ui);
            let fm = 0.5 * d * (ws.flux_vals[im] + ws.flux_vals[i]) - 0.5 * lm * (ui - um);
            acc += -r * (fp - fm) + nu * (up - 2.0 * ui + um);
            local += r * lp.max(lm) + 2.0 * nu;
        }
        mono = mono.max(local);
        if !ws.profiles.is_empty() {
            let s = cfg.noise.shape(ui);
            let forcing: f64 = ws.profiles.iter().zip(dbeta).map(|(p, b)| p[i] * b).sum();
            acc += s * forcing;
        }
        ws.next[i] = acc;
    }
    if let Some((idx, v)) = ws.next.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(KinError::NonFinite {
            index: idx,
            value: *v,
        });
    }
    std::mem::swap(&mut u.values, &mut ws.next);
    Ok(mono)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxModel;
    use crate::grid::TorusGrid;
    use crate::noise::NoiseModel;
    use crate::solver::InitialData;
    use std::f64::consts::PI;

    fn cfg(n: usize, flux: FluxModel, eta: f64) -> SolverConfig {
        SolverConfig::new(
            TorusGrid::new(1, n).unwrap(),
            flux,
            NoiseModel::zero(1),
            InitialData::Constant { c: 0.0 },
            eta,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn stable_dt_rules() {
        let c = cfg(64, FluxModel::burgers(1), 1e-12);
        assert!((stable_dt(&c, 1.0) - 0.4 / 64.0).abs() < 1e-15);
        let d = cfg(64, FluxModel::linear(0.0, 1), 0.01);
        let dx = 1.0 / 64.0;
        assert!((stable_dt(&d, 1.0) - 0.4 * dx * dx / 0.02).abs() < 1e-15);
        let e = cfg(128, FluxModel::linear(0.0, 1), 0.01);
        assert!((stable_dt(&e, 1.0) * 4.0 - stable_dt(&d, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn heat_factor_exact() {
        let n = 32;
        let c = cfg(n, FluxModel::linear(0.0, 1), 0.05);
        let mut u = GridField::from_fn(c.grid, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let u0 = u.clone();
        let dt = stable_dt(&c, 1.0);
        let mut ws = StepWorkspace::new(&c);
        step(&mut u, dt, &[], &c, &mut ws).unwrap();
        let dx = c.grid.dx();
        let factor = 1.0 - 0.05 * dt * (2.0 - 2.0 * (2.0 * PI * dx).cos()) / (dx * dx);
        for (a, b) in u.values.iter().zip(&u0.values) {
            assert!((a - factor * b).abs() < 1e-14);
        }
    }

    #[test]
    fn nonfinite_aborts() {
        let c = cfg(8, FluxModel::burgers(1), 0.0);
        let mut u = GridField::constant(c.grid, 1e200);
        let mut ws = StepWorkspace::new(&c);
        assert!(step(&mut u, 1.0, &[], &c, &mut ws).is_err());
    }
}
