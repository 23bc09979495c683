//! Ensemble experiments. Each returns a table and a pass/fail decision;
//! paths run in parallel but results are collected and reduced in path
//! order, so every number is independent of the thread count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::manifest::{path_seeds, RunManifest};
use super::output::{emit_csv, PathCheckpoint, Table};
use super::reduce::Accumulator;
use crate::doubling::positive_part_l1;
use crate::error::{KinError, Result};
use crate::flux::FluxModel;
use crate::grid::{seminorm_p_sigma_rho, GridField, MollifierKind, TorusGrid};
use crate::kinetic::{kinetic_function, write_kinetic_csv, XiGrid};
use crate::noise::NoiseModel;
use crate::oracles::burgers_riemann_periodic;
use crate::solver::{energy_margins, run_path, InitialData, PathRun, SolverConfig, SolverSpec};

/// Relative tolerance for identities that hold up to rounding.
const ROUNDING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Simulate,
    Contraction,
    Viscosity,
    Regularity,
    Energy,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Contraction => "contraction",
            Experiment::Viscosity => "viscosity",
            Experiment::Regularity => "regularity",
            Experiment::Energy => "energy",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Experiment::Simulate,
            "contraction" => Experiment::Contraction,
            "viscosity" => Experiment::Viscosity,
            "regularity" => Experiment::Regularity,
            "energy" => Experiment::Energy,
            _ => return Err(KinError::InvalidConfig(format!("unknown experiment {s}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub pass: bool,
    pub table: Table,
    /// Scalar diagnostics by name.
    pub details: BTreeMap<String, f64>,
    /// Human readable reasons for failed checks.
    pub failures: Vec<String>,
}

impl ExperimentReport {
    fn new(e: Experiment, table: Table) -> Self {
        Self::named(e.name(), table)
    }

    pub fn named(name: &str, table: Table) -> Self {
        Self {
            experiment: name.into(),
            pass: true,
            table,
            details: BTreeMap::new(),
            failures: vec![],
        }
    }

    pub fn detail(&mut self, name: &str, v: f64) {
        self.details.insert(name.into(), v);
    }

    pub fn require(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.pass = false;
            self.failures.push(msg());
        }
    }
}

/// Maps `f` over the seeds on a dedicated pool of `threads` workers
/// (0 selects the rayon default) and returns results in seed order.
pub fn ensemble_map<T, F>(seeds: &[u64], threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| KinError::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(i, &s)| f(i, s))
            .collect()
    })
}

/// t_k = k·T/K for k = 0..=K.
pub fn sample_times(t_end: f64, samples: usize) -> Vec<f64> {
    (0..=samples)
        .map(|k| t_end * k as f64 / samples as f64)
        .collect()
}

/// Gives coupled configs a common step so that equal seeds drive them with
/// the same Brownian increments.
pub fn couple_steps(cfgs: &mut [SolverConfig]) -> Result<()> {
    let mut base = 1;
    for c in cfgs.iter() {
        base = base.max(c.base_step_count()?);
    }
    let level = cfgs.first().map(|c| c.refine_level).unwrap_or(0);
    for c in cfgs.iter_mut() {
        c.base_steps = Some(base);
        c.refine_level = level;
    }
    Ok(())
}

fn prepared(
    cfg: &ExperimentConfig,
    spec: &SolverSpec,
    initial: InitialData,
) -> Result<SolverConfig> {
    let mut c = SolverConfig::from_specs(&cfg.grid, &cfg.flux, &cfg.noise_spec(), initial, spec)?;
    c.snapshot_times = sample_times(spec.t_end, cfg.checks.time_samples);
    Ok(c)
}

fn series(acc: &[Accumulator]) -> (Vec<f64>, Vec<f64>) {
    (
        acc.iter().map(|a| a.mean()).collect(),
        acc.iter().map(|a| a.stderr()).collect(),
    )
}

fn accumulate(rows: &[Vec<f64>]) -> Vec<Accumulator> {
    let len = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut acc = vec![Accumulator::default(); len];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            a.push(*v);
        }
    }
    acc
}

fn snapshot_times(run: &PathRun) -> Vec<f64> {
    run.snapshots.iter().map(|s| s.t).collect()
}

/// E∫(u₁-u₂)^+ for two initial data driven by the same noise.
pub fn run_contraction(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    let pair = cfg
        .initial_pair
        .clone()
        .ok_or_else(|| KinError::InvalidConfig("contraction needs initial_pair".into()))?;
    let mut s = cfg.solver.clone();
    s.record_kinetic = false;
    let mut cfgs = [
        prepared(cfg, &s, cfg.initial.clone())?,
        prepared(cfg, &s, pair)?,
    ];
    couple_steps(&mut cfgs)?;
    let dt = cfgs[0].dt()?;
    let vol = cfgs[0].grid.cell_volume();
    let seeds = path_seeds(cfg.master_seed, cfg.ensemble_size);
    let per_path = ensemble_map(&seeds, threads, |_, seed| {
        let a = run_path(&cfgs[0], seed)?;
        let b = run_path(&cfgs[1], seed)?;
        let v: Vec<f64> = a
            .snapshots
            .iter()
            .zip(&b.snapshots)
            .map(|(x, y)| positive_part_l1(&x.field.values, &y.field.values, vol))
            .collect();
        Ok((snapshot_times(&a), v))
    })?;
    let times = per_path[0].0.clone();
    let values: Vec<Vec<f64>> = per_path.into_iter().map(|p| p.1).collect();
    let increments: Vec<Vec<f64>> = values
        .iter()
        .map(|v| v.windows(2).map(|w| w[1] - w[0]).collect())
        .collect();
    let (mean, se) = series(&accumulate(&values));
    let (inc_mean, inc_se) = series(&accumulate(&increments));

    let mut table = Table::new(&["t", "e_pos_l1", "mc_stderr"]);
    for k in 0..times.len() {
        table.push(vec![times[k], mean[k], se[k]])?;
    }
    let mut rep = ExperimentReport::new(Experiment::Contraction, table);
    let slack = cfg.checks.contraction_slack * dt;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..inc_mean.len() {
        let excess = inc_mean[k] - 3.0 * inc_se[k] - slack;
        worst = worst.max(excess);
        rep.require(excess <= 0.0, || {
            format!(
                "E increment {:.3e} on [{}, {}] exceeds 3·stderr + C·dt",
                inc_mean[k],
                times[k],
                times[k + 1]
            )
        });
    }
    let pathwise = increments
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = mean[0].max(1.0);
    let noise = &cfgs[0].noise;
    if noise.is_zero() || noise.is_additive() {
        rep.require(pathwise <= ROUNDING_TOL * scale, || {
            format!("pathwise increase {pathwise:.3e} with noise independent of u")
        });
    }
    rep.detail("dt", dt);
    rep.detail("worst_excess", worst);
    rep.detail("pathwise_max_increment", pathwise);
    Ok(rep)
}

/// L1(0,T;L1) distance of two snapshot sequences by the trapezoid rule.
fn space_time_l1(a: &PathRun, b: &PathRun) -> f64 {
    let vol = a.final_field().grid.cell_volume();
    let d: Vec<(f64, f64)> = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| {
            let l1: f64 = x
                .field
                .values
                .iter()
                .zip(&y.field.values)
                .map(|(p, q)| (p - q).abs())
                .sum();
            (x.t, l1 * vol)
        })
        .collect();
    d.windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Cauchy differences E‖u^{η_k} - u^{η_{k+1}}‖ along the configured ladder.
pub fn run_viscosity(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    let ladder = &cfg.eta_ladder;
    if ladder.len() < 2 || ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(KinError::InvalidConfig(
            "eta_ladder needs at least two strictly decreasing values".into(),
        ));
    }
    let mut cfgs = ladder
        .iter()
        .map(|&eta| {
            let mut s = cfg.solver.clone();
            s.eta = eta;
            s.record_kinetic = false;
            prepared(cfg, &s, cfg.initial.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    couple_steps(&mut cfgs)?;
    let dt = cfgs[0].dt()?;
    let seeds = path_seeds(cfg.master_seed, cfg.ensemble_size);
    let per_path = ensemble_map(&seeds, threads, |_, seed| {
        let runs = cfgs
            .iter()
            .map(|c| run_path(c, seed))
            .collect::<Result<Vec<_>>>()?;
        let bound = runs
            .iter()
            .map(|r| r.u_min.abs().max(r.u_max.abs()))
            .fold(0.0, f64::max);
        let d: Vec<f64> = runs
            .windows(2)
            .map(|w| space_time_l1(&w[0], &w[1]))
            .collect();
        Ok((d, bound))
    })?;
    let u_max = per_path.iter().map(|p| p.1).fold(0.0, f64::max);
    let diffs: Vec<Vec<f64>> = per_path.into_iter().map(|p| p.0).collect();
    let steps: Vec<Vec<f64>> = diffs
        .iter()
        .map(|d| d.windows(2).map(|w| w[1] - w[0]).collect())
        .collect();
    let (mean, se) = series(&accumulate(&diffs));
    let (step_mean, step_se) = series(&accumulate(&steps));

    let mut table = Table::new(&["eta", "e_l1_diff", "stderr"]);
    for k in 0..mean.len() {
        table.push(vec![ladder[k], mean[k], se[k]])?;
    }
    let mut rep = ExperimentReport::new(Experiment::Viscosity, table);
    let floor = 4.0 * cfgs[0].grid.dx() * cfgs[0].flux.max_speed(u_max);
    let eta_min = *ladder.last().expect("nonempty ladder");
    rep.require(eta_min >= floor, || {
        format!("smallest eta {eta_min} is below 4·dx·max|a| = {floor:.4e}")
    });
    for k in 0..step_mean.len() {
        rep.require(step_mean[k] < 3.0 * step_se[k], || {
            format!(
                "difference at eta={} does not decrease ({} -> {})",
                ladder[k + 1],
                mean[k],
                mean[k + 1]
            )
        });
    }
    rep.detail("dt", dt);
    rep.detail("eta_floor", floor);
    rep.detail("observed_u_max", u_max);
    Ok(rep)
}

/// L1 error of the deterministic viscous Burgers solution against the
/// periodic Riemann oracle at time `t`.
pub fn riemann_error(
    u_left: f64,
    u_right: f64,
    split: f64,
    t: f64,
    n: usize,
    eta: f64,
) -> Result<f64> {
    let grid = TorusGrid::new(1, n)?;
    let spec = SolverSpec {
        eta,
        t_end: t,
        record_kinetic: false,
        ..Default::default()
    };
    let cfg = SolverConfig::from_parts(
        grid,
        FluxModel::burgers(1),
        NoiseModel::zero(1),
        InitialData::Riemann {
            u_left,
            u_right,
            split,
        },
        &spec,
    )?;
    let run = run_path(&cfg, 0)?;
    let exact = burgers_riemann_periodic(u_left, u_right, split, t, grid)?;
    Ok(l1_distance(run.final_field(), &exact))
}

fn l1_distance(a: &GridField, b: &GridField) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
        * a.grid.cell_volume()
}

/// E p^σ_ρ(u(t)) and the smallest C with E p^σ_ρ(u(t)) ≤ C(E p^σ_ρ(u₀) + t)
/// at every sampled t > 0.
pub fn run_regularity(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    let sigma = cfg.sigma()?;
    let mut s = cfg.solver.clone();
    s.record_kinetic = false;
    let c = prepared(cfg, &s, cfg.initial.clone())?;
    let seeds = path_seeds(cfg.master_seed, cfg.ensemble_size);
    let per_path = ensemble_map(&seeds, threads, |_, seed| {
        let run = run_path(&c, seed)?;
        let p = run
            .snapshots
            .iter()
            .map(|s| seminorm_p_sigma_rho(&s.field, sigma, MollifierKind::Triangular))
            .collect::<Result<Vec<_>>>()?;
        Ok((snapshot_times(&run), p))
    })?;
    let times = per_path[0].0.clone();
    let values: Vec<Vec<f64>> = per_path.into_iter().map(|p| p.1).collect();
    let (mean, se) = series(&accumulate(&values));
    let mut table = Table::new(&["t", "e_p_sigma_rho", "stderr"]);
    for k in 0..times.len() {
        table.push(vec![times[k], mean[k], se[k]])?;
    }
    let envelope = times
        .iter()
        .zip(&mean)
        .skip(1)
        .map(|(t, m)| m / (mean[0] + t))
        .fold(0.0, f64::max);
    let mut rep = ExperimentReport::new(Experiment::Regularity, table);
    rep.require(envelope.is_finite(), || {
        "envelope constant is not finite".into()
    });
    if let Some(cmax) = cfg.checks.regularity_c_max {
        rep.require(envelope <= cmax, || {
            format!("envelope constant {envelope} exceeds {cmax}")
        });
    }
    rep.detail("sigma", sigma);
    rep.detail("envelope_constant", envelope);
    Ok(rep)
}

#[derive(Debug, Clone)]
struct EnergyPath {
    times: Vec<f64>,
    margins: Vec<f64>,
    initial_l2: f64,
    mass_rel_err: f64,
    min_weight: f64,
    measure_mass: f64,
    xi2: f64,
    sup_l4: Option<f64>,
}

fn energy_path(c: &SolverConfig, seed: u64) -> Result<EnergyPath> {
    let run = run_path(c, seed)?;
    let m = energy_margins(&run);
    let visc = run.viscous_dissipation();
    let (mass_rel_err, min_weight, measure_mass, xi2) = match &run.kinetic_measure {
        Some(k) => {
            let mass = k.sum_weights();
            (
                (mass - visc).abs() / visc.max(f64::MIN_POSITIVE),
                k.min_weight(),
                mass,
                k.tail(0.0, 2.0).moment,
            )
        }
        None => (0.0, 0.0, visc, f64::NAN),
    };
    let sup_l4 = run.moment_powers.iter().position(|p| *p == 4.0).map(|j| {
        run.ledger
            .iter()
            .map(|r| r.lp[j])
            .fold(run.initial_lp[j], f64::max)
    });
    Ok(EnergyPath {
        times: m.iter().map(|x| x.0).collect(),
        margins: m.iter().map(|x| x.1).collect(),
        initial_l2: run.initial_l2_sq,
        mass_rel_err,
        min_weight,
        measure_mass,
        xi2,
        sup_l4,
    })
}

/// Energy identity margins, kinetic measure mass and tails, L⁴ moments.
pub fn run_energy(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentReport> {
    let c = prepared(cfg, &cfg.solver, cfg.initial.clone())?;
    let dt = c.dt()?;
    let seeds = path_seeds(cfg.master_seed, cfg.ensemble_size);
    let paths = ensemble_map(&seeds, threads, |_, seed| energy_path(&c, seed))?;
    let margins: Vec<Vec<f64>> = paths.iter().map(|p| p.margins.clone()).collect();
    let (mean, se) = series(&accumulate(&margins));
    let times = paths[0].times.clone();
    let mut table = Table::new(&["t", "mean_margin", "stderr"]);
    for k in 0..times.len() {
        table.push(vec![times[k], mean[k], se[k]])?;
    }
    let mut rep = ExperimentReport::new(Experiment::Energy, table);
    let slack = cfg.checks.energy_slack * dt;
    for k in 0..times.len() {
        rep.require(mean[k] <= 3.0 * se[k] + slack, || {
            format!(
                "mean margin {:.3e} at t={} exceeds 3·stderr + C·dt",
                mean[k], times[k]
            )
        });
    }
    let max_margin = mean.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rep.detail("dt", dt);
    rep.detail("max_mean_margin", max_margin);

    if c.noise.is_zero() {
        let worst = paths
            .iter()
            .map(|p| {
                p.margins.iter().copied().fold(f64::NEG_INFINITY, f64::max) / p.initial_l2.max(1.0)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        rep.require(worst <= ROUNDING_TOL, || {
            format!("deterministic path gains energy ({worst:.3e})")
        });
        rep.detail("pathwise_max_margin", worst);
    }

    if c.record_kinetic {
        let mass_err = paths.iter().map(|p| p.mass_rel_err).fold(0.0, f64::max);
        let min_w = paths
            .iter()
            .map(|p| p.min_weight)
            .fold(f64::INFINITY, f64::min);
        let mut mass = Accumulator::default();
        let mut xi2 = Accumulator::default();
        let mut xi2_sq = Accumulator::default();
        for p in &paths {
            mass.push(p.measure_mass);
            xi2.push(p.xi2);
            xi2_sq.push(p.xi2 * p.xi2);
        }
        rep.require(mass_err <= ROUNDING_TOL, || {
            format!("measure mass differs from the dissipation by {mass_err:.3e}")
        });
        rep.require(min_w >= 0.0, || format!("negative measure weight {min_w}"));
        rep.detail("mass_identity_rel_err", mass_err);
        rep.detail("min_weight", min_w);
        rep.detail("e_measure_mass", mass.mean());
        rep.detail("e_xi2_moment", xi2.mean());
        rep.detail("e_xi2_moment_sq", xi2_sq.mean());
        for (bound, v, name) in [
            (cfg.checks.measure_mass_bound, mass.mean(), "measure mass"),
            (cfg.checks.measure_xi2_bound, xi2.mean(), "xi^2 moment"),
            (
                cfg.checks.measure_xi2_sq_bound,
                xi2_sq.mean(),
                "squared xi^2 moment",
            ),
        ] {
            if let Some(b) = bound {
                rep.require(v <= b, || format!("{name} {v} exceeds {b}"));
            }
        }
    }
    let l4: Vec<f64> = paths.iter().filter_map(|p| p.sup_l4).collect();
    if l4.len() == paths.len() {
        let mut acc = Accumulator::default();
        l4.iter().for_each(|v| acc.push(*v));
        rep.detail("e_sup_l4", acc.mean());
        rep.detail("e_sup_l4_stderr", acc.stderr());
        if let Some(b) = cfg.checks.moment_bound {
            rep.require(acc.mean() <= b, || {
                format!("E sup ‖u‖₄⁴ = {} exceeds {b}", acc.mean())
            });
        }
    }
    Ok(rep)
}

fn path_stem(i: usize) -> String {
    format!("path_{i:04}")
}

/// Runs the ensemble and, when `out` is given, writes per-path kinetic
/// measure and final kinetic snapshot CSVs plus a checkpoint.
pub fn run_simulate(
    cfg: &ExperimentConfig,
    threads: usize,
    out: Option<&Path>,
) -> Result<(ExperimentReport, Vec<PathBuf>)> {
    let c = cfg.solver_config()?;
    let seeds = path_seeds(cfg.master_seed, cfg.ensemble_size);
    let per_path = ensemble_map(&seeds, threads, |i, seed| {
        let run = run_path(&c, seed)?;
        let mut files = vec![];
        if let Some(dir) = out {
            std::fs::create_dir_all(dir)?;
            let stem = path_stem(i);
            if let Some(m) = &run.kinetic_measure {
                let p = dir.join(format!("{stem}_measure.csv"));
                m.write_csv(std::fs::File::create(&p)?)?;
                files.push(p);
            }
            let u = run.final_field();
            let xi = XiGrid::covering(u.min(), u.max(), c.xi_bins)?;
            let p = dir.join(format!("{stem}_kinetic.csv"));
            write_kinetic_csv(
                &kinetic_function(u, &xi),
                Some(&c.grid),
                std::fs::File::create(&p)?,
            )?;
            files.push(p);
            let p = dir.join(format!("{stem}.json"));
            PathCheckpoint::from_run(&run).write(&p)?;
            files.push(p);
        }
        let u = run.final_field();
        let row = vec![
            i as f64,
            u.integral(),
            run.ledger
                .last()
                .map(|r| r.l2_sq)
                .unwrap_or(run.initial_l2_sq),
            run.u_min,
            run.u_max,
            run.viscous_dissipation(),
            run.cfl_violations as f64,
        ];
        Ok((row, files))
    })?;
    let mut table = Table::new(&[
        "path",
        "mean_u",
        "l2_sq",
        "u_min",
        "u_max",
        "dissipation",
        "cfl_violations",
    ]);
    let mut files = vec![];
    let mut violations = 0.0;
    for (row, f) in per_path {
        violations += row[6];
        table.push(row)?;
        files.extend(f);
    }
    let mut rep = ExperimentReport::new(Experiment::Simulate, table);
    rep.require(violations == 0.0, || {
        format!("{violations} steps exceeded the monotonicity limit")
    });
    rep.detail("dt", c.dt()?);
    Ok((rep, files))
}

pub fn run_experiment(
    e: Experiment,
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentReport> {
    match e {
        Experiment::Simulate => run_simulate(cfg, threads, None).map(|r| r.0),
        Experiment::Contraction => run_contraction(cfg, threads),
        Experiment::Viscosity => run_viscosity(cfg, threads),
        Experiment::Regularity => run_regularity(cfg, threads),
        Experiment::Energy => run_energy(cfg, threads),
    }
}

/// Writes the manifest, runs the experiment, then writes the table,
/// a JSON report and the completed manifest into `out`.
pub fn run_and_write(
    e: Experiment,
    cfg: &ExperimentConfig,
    threads: usize,
    out: &Path,
) -> Result<ExperimentReport> {
    let mut manifest = RunManifest::begin(e.name(), cfg, threads);
    manifest.write(out)?;
    let result = match e {
        Experiment::Simulate => run_simulate(cfg, threads, Some(out)),
        _ => run_experiment(e, cfg, threads).map(|r| (r, vec![])),
    };
    let (rep, mut files) = match result {
        Ok(r) => r,
        Err(err) => {
            manifest.fail(&err.to_string());
            manifest.write(out)?;
            return Err(err);
        }
    };
    let csv = out.join(format!("{}.csv", e.name()));
    emit_csv(&rep.table, &csv)?;
    files.push(csv);
    let json = out.join(format!("{}_report.json", e.name()));
    std::fs::write(&json, serde_json::to_string_pretty(&rep)?)?;
    files.push(json);
    manifest.complete(
        rep.pass,
        files
            .iter()
            .map(|p| {
                p.strip_prefix(out)
                    .unwrap_or(p)
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
    );
    manifest.write(out)?;
    Ok(rep)
}
