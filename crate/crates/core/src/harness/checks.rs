//! Standalone structural checks and oracle runs behind the `check` and
//! `oracle` subcommands.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiments::{riemann_error, ExperimentReport};
use super::output::Table;
use crate::doubling::build_psi;
use crate::error::{KinError, Result};
use crate::flux::{check_gamma, default_lattice};
use crate::kinetic::XiGrid;
use crate::noise::{default_d1_samples, verify_d0, verify_d1};
use crate::oracles::{collapse_catalog, collapse_errors, collapse_measure, HeavisideMix};

/// Noise growth and Hölder bounds on the documented lattices.
pub fn check_d0d1(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let c = cfg.solver_config()?;
    let r = c.effective_u_bound()?.max(3.0);
    let d0 = verify_d0(&c.noise, r, 241);
    let d1 = verify_d1(&c.noise, &default_d1_samples(c.grid.dim()));
    let mut t = Table::new(&["bound", "declared", "max_ratio", "samples"]);
    t.push(vec![0.0, d0.declared, d0.max_ratio, d0.samples as f64])?;
    t.push(vec![1.0, d1.declared, d1.max_ratio, d1.samples as f64])?;
    let mut rep = ExperimentReport::named("d0d1", t);
    rep.require(d0.pass, || {
        format!("D0 ratio {} exceeds {}", d0.max_ratio, d0.declared)
    });
    rep.require(d1.pass, || {
        format!("D1 ratio {} exceeds {}", d1.max_ratio, d1.declared)
    });
    rep.detail("u_range", r);
    Ok(rep)
}

/// |a(ξ)-a(ζ)| ≤ Γ(ξ,ζ)|ξ-ζ| on a symmetric lattice.
pub fn check_flux_gamma(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let c = cfg.solver_config()?;
    let r = c.effective_u_bound()?.max(3.0);
    let g = check_gamma(&c.flux, &default_lattice(r, 61));
    let mut t = Table::new(&["max_ratio", "pairs_checked", "pairs_skipped"]);
    t.push(vec![
        g.max_ratio,
        g.pairs_checked as f64,
        g.pairs_skipped as f64,
    ])?;
    let mut rep = ExperimentReport::named("gamma", t);
    rep.require(g.pass, || format!("gamma ratio {} exceeds 1", g.max_ratio));
    rep.detail("lattice_radius", r);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsiParams {
    pub deltas: Vec<f64>,
    pub samples: usize,
}

impl Default for PsiParams {
    fn default() -> Self {
        Self {
            deltas: vec![1.0, 0.1, 0.01],
            samples: 1000,
        }
    }
}

pub fn check_psi_pair(p: &PsiParams) -> Result<ExperimentReport> {
    let mut t = Table::new(&["delta", "mass", "psi2_at_zero", "c_psi_numeric", "pass"]);
    let mut failed = vec![];
    for &d in &p.deltas {
        let r = build_psi(d)?.check(p.samples);
        t.push(vec![
            d,
            r.mass,
            r.psi2_at_zero,
            r.c_psi_numeric,
            r.pass as u8 as f64,
        ])?;
        if !r.pass {
            failed.push(d);
        }
    }
    let mut rep = ExperimentReport::named("psipair", t);
    rep.require(failed.is_empty(), || format!("failed deltas {failed:?}"));
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CollapseParams {
    /// Index into the built-in catalog; ignored when `atoms` is given.
    pub catalog: usize,
    pub atoms: Option<Vec<(f64, f64)>>,
    pub t: f64,
    pub dts: Vec<f64>,
    pub dxi: f64,
    /// Accepted band for consecutive error ratios.
    pub ratio_band: (f64, f64),
}

impl Default for CollapseParams {
    fn default() -> Self {
        Self {
            catalog: 2,
            atoms: None,
            t: 1.0,
            dts: vec![0.1, 0.05, 0.025],
            dxi: 0.01,
            ratio_band: (1.8, 2.2),
        }
    }
}

/// First-order convergence of the explicit collapse scheme and the sign
/// of the collapse measure on a (t, ξ) lattice.
pub fn run_collapse_oracle(p: &CollapseParams) -> Result<ExperimentReport> {
    let f0 = match &p.atoms {
        Some(a) => HeavisideMix::new(a.clone())?,
        None => collapse_catalog()
            .get(p.catalog)
            .cloned()
            .ok_or_else(|| KinError::InvalidConfig(format!("no catalog entry {}", p.catalog)))?,
    };
    let (lo, hi) = f0.support();
    let xi = XiGrid::with_spacing(lo - 0.5, hi + 0.5, p.dxi)?;
    let errs = collapse_errors(&f0, p.t, &p.dts, &xi)?;
    let mut t = Table::new(&["dt", "l1_error"]);
    for (dt, e) in &errs {
        t.push(vec![*dt, *e])?;
    }
    let mut rep = ExperimentReport::named("collapse", t);
    for w in errs.windows(2) {
        let ratio = w[0].1 / w[1].1;
        rep.require(ratio >= p.ratio_band.0 && ratio <= p.ratio_band.1, || {
            format!("error ratio {ratio} at dt={} outside the band", w[1].0)
        });
        rep.detail(&format!("ratio_dt_{}", w[1].0), ratio);
    }
    let mut min_m = f64::INFINITY;
    for i in 0..=20 {
        let tt = p.t * i as f64 / 20.0;
        for j in 0..=200 {
            let z = lo - 0.5 + (hi - lo + 1.0) * j as f64 / 200.0;
            min_m = min_m.min(collapse_measure(&f0, tt, z));
        }
    }
    rep.require(min_m >= -1e-12, || format!("collapse measure {min_m} < 0"));
    rep.detail("min_measure", min_m);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RiemannParams {
    pub u_left: f64,
    pub u_right: f64,
    pub split: f64,
    pub t: f64,
    /// Grid ladder run at η = eta_factors.last()·dx·max|a|.
    pub n: Vec<usize>,
    /// η ladder, in units of dx·max|a|, run on the finest grid.
    pub eta_factors: Vec<f64>,
    pub max_final_error: Option<f64>,
}

impl Default for RiemannParams {
    fn default() -> Self {
        Self {
            u_left: 1.0,
            u_right: 0.0,
            split: 0.5,
            t: 0.1,
            n: vec![128, 256, 512],
            eta_factors: vec![16.0, 8.0, 4.0],
            max_final_error: Some(0.05),
        }
    }
}

/// Viscous Burgers against the exact periodic Riemann solution: first an
/// η ladder on the finest grid, then a grid ladder with η tied to dx.
pub fn run_riemann_oracle(p: &RiemannParams) -> Result<ExperimentReport> {
    let (Some(&n_fine), Some(&factor)) = (p.n.last(), p.eta_factors.last()) else {
        return Err(KinError::InvalidConfig(
            "riemann oracle needs grid sizes and eta factors".into(),
        ));
    };
    let speed = p.u_left.abs().max(p.u_right.abs());
    let mut t = Table::new(&["n", "eta", "l1_error"]);
    let mut rep_rows = vec![];
    let mut eta_errs = vec![];
    for &f in &p.eta_factors {
        let eta = f * speed / n_fine as f64;
        let e = riemann_error(p.u_left, p.u_right, p.split, p.t, n_fine, eta)?;
        rep_rows.push(vec![n_fine as f64, eta, e]);
        eta_errs.push(e);
    }
    let mut dx_errs = vec![];
    for &n in &p.n {
        let eta = factor * speed / n as f64;
        let e = riemann_error(p.u_left, p.u_right, p.split, p.t, n, eta)?;
        rep_rows.push(vec![n as f64, eta, e]);
        dx_errs.push(e);
    }
    for r in rep_rows {
        t.push(r)?;
    }
    let mut rep = ExperimentReport::named("riemann", t);
    for (k, w) in eta_errs.windows(2).enumerate() {
        rep.require(w[1] < w[0], || {
            format!(
                "error does not decrease at eta factor {}",
                p.eta_factors[k + 1]
            )
        });
    }
    for (k, w) in dx_errs.windows(2).enumerate() {
        rep.require(w[1] < w[0], || {
            format!("error does not decrease at n={}", p.n[k + 1])
        });
    }
    if let (Some(b), Some(last)) = (p.max_final_error, dx_errs.last()) {
        rep.require(*last < b, || format!("final error {last} is not below {b}"));
        rep.detail("final_error", *last);
    }
    Ok(rep)
}

/// Parses `s` as inline JSON, or as a path to a JSON file otherwise.
pub fn parse_params<T: serde::de::DeserializeOwned>(s: &str) -> Result<T> {
    let t = s.trim_start();
    if t.starts_with('{') {
        Ok(serde_json::from_str(t)?)
    } else {
        Ok(serde_json::from_str(&std::fs::read_to_string(s)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapse_oracle_default_passes() {
        let rep = run_collapse_oracle(&CollapseParams::default()).unwrap();
        assert!(rep.pass, "{:?}", rep.failures);
    }

    #[test]
    fn psi_defaults_pass() {
        assert!(check_psi_pair(&PsiParams::default()).unwrap().pass);
    }

    #[test]
    fn inline_params() {
        let p: RiemannParams = parse_params(r#"{"t": 0.2}"#).unwrap();
        assert_eq!(p.t, 0.2);
        assert_eq!(p.eta_factors, vec![16.0, 8.0, 4.0]);
        assert_eq!(p.n, vec![128, 256, 512]);
    }
}
