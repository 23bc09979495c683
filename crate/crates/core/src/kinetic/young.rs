//! Empirical Young measures, their moments, and weak-convergence checks of
//! kinetic-function sequences.

use serde::{Deserialize, Serialize};

use super::{chi, KineticFunction, XiFactor};
use crate::error::{KinError, Result};
use crate::grid::GridField;

/// A family of probability measures on ξ, one per spatial point, each stored
/// as a list of (position, weight) atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungMeasure {
    /// Spatial weight of each fiber (dx^N for grid points).
    pub cell_volume: f64,
    pub fibers: Vec<Vec<(f64, f64)>>,
}

impl YoungMeasure {
    /// ν_x = δ_{u(x)}.
    pub fn from_field(u: &GridField) -> Self {
        Self {
            cell_volume: u.grid.cell_volume(),
            fibers: u.values.iter().map(|&v| vec![(v, 1.0)]).collect(),
        }
    }

    /// ν = -Δ_ξ f, atoms on the bin edges.
    pub fn from_kinetic(f: &KineticFunction, cell_volume: f64) -> Self {
        let edges = f.xi.edges();
        let fibers = (0..f.n_points)
            .map(|i| {
                edges
                    .iter()
                    .zip(f.young_weights(i))
                    .filter(|(_, w)| *w != 0.0)
                    .map(|(e, w)| (*e, w))
                    .collect()
            })
            .collect();
        Self {
            cell_volume,
            fibers,
        }
    }

    /// Largest deviation of a fiber's total mass from 1.
    pub fn mass_defect(&self) -> f64 {
        self.fibers
            .iter()
            .map(|f| (f.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// ∫_x ∫ |ξ|^p dν_x(ξ) for a single fiber index.
    pub fn fiber_moment(&self, i: usize, p: f64) -> f64 {
        self.fibers[i]
            .iter()
            .map(|(x, w)| w * x.abs().powf(p))
            .sum()
    }
}

/// ∫_{T^N} ∫_R |ξ|^p dν_x(ξ) dx.
pub fn young_moment(nu: &YoungMeasure, p: f64) -> f64 {
    (0..nu.fibers.len())
        .map(|i| nu.fiber_moment(i, p))
        .sum::<f64>()
        * nu.cell_volume
}

/// Empirical Young measure of a field seen at resolution `blocks` per axis:
/// fiber b collects the values of u in block b with equal weights.
pub fn local_young_measure(u: &GridField, blocks: usize) -> Result<YoungMeasure> {
    let g = u.grid;
    if blocks == 0 || !g.n().is_multiple_of(blocks) {
        return Err(KinError::Invalid(format!(
            "{blocks} blocks do not divide n = {}",
            g.n()
        )));
    }
    let per = g.n() / blocks;
    let n_fibers = blocks.pow(g.dim() as u32);
    let mut fibers = vec![Vec::new(); n_fibers];
    for i in 0..g.len() {
        let c = g.coords(i);
        let b = if g.dim() == 1 {
            c[0] / per
        } else {
            (c[0] / per) * blocks + c[1] / per
        };
        fibers[b].push(u.values[i]);
    }
    let fibers = fibers
        .into_iter()
        .map(|vals| {
            let w = 1.0 / vals.len() as f64;
            vals.into_iter().map(|v| (v, w)).collect()
        })
        .collect();
    Ok(YoungMeasure {
        cell_volume: 1.0 / n_fibers as f64,
        fibers,
    })
}

/// H(x, ξ) = α(x) γ(ξ) with α tabulated per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableTest {
    pub alpha: Vec<f64>,
    pub gamma: XiFactor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// max over tests of |∫∫ (χ_{f_n} - χ_f) H| for each sequence member.
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub last_gap: f64,
}

fn pairing(f: &KineticFunction, chi_f: &[f64], i: usize, gamma_c: &[f64]) -> f64 {
    let b = f.xi.bins;
    chi_f[i * b..(i + 1) * b]
        .iter()
        .zip(gamma_c)
        .map(|(c, g)| c * g)
        .sum::<f64>()
        * f.xi.dxi
}

/// Compares each member of `sequence` against `limit` on separable tests.
/// A single-fiber limit is broadcast over all points.
pub fn weak_convergence_check(
    sequence: &[KineticFunction],
    limit: &KineticFunction,
    tests: &[SeparableTest],
    cell_volume: f64,
) -> Result<ConvergenceReport> {
    let chi_lim = chi(limit);
    let mut gaps = Vec::with_capacity(sequence.len());
    for f in sequence {
        if !f.xi.same_bins(&limit.xi) {
            return Err(KinError::Incompatible(
                "sequence and limit use different xi grids".into(),
            ));
        }
        if limit.n_points != 1 && limit.n_points != f.n_points {
            return Err(KinError::Incompatible(
                "limit has a different number of points".into(),
            ));
        }
        let chi_f = chi(f);
        let mut gap = 0.0f64;
        for t in tests {
            if t.alpha.len() != f.n_points {
                return Err(KinError::Incompatible(
                    "test function has a different number of points".into(),
                ));
            }
            let gc: Vec<f64> = f.xi.centers().iter().map(|&c| t.gamma.eval(c)).collect();
            let mut s = 0.0;
            for i in 0..f.n_points {
                let li = if limit.n_points == 1 { 0 } else { i };
                s += t.alpha[i] * (pairing(f, &chi_f, i, &gc) - pairing(limit, &chi_lim, li, &gc));
            }
            gap = gap.max((s * cell_volume).abs());
        }
        gaps.push(gap);
    }
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let last_gap = gaps.last().copied().unwrap_or(0.0);
    Ok(ConvergenceReport {
        gaps,
        max_gap,
        last_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::kinetic::{kinetic_function, XiGrid};
    use std::f64::consts::PI;

    #[test]
    fn atoms_and_moments() {
        let g = TorusGrid::new(1, 8).unwrap();
        let u = GridField::constant(g, -1.5);
        let nu = YoungMeasure::from_field(&u);
        assert_eq!(nu.mass_defect(), 0.0);
        assert!((young_moment(&nu, 3.0) - 1.5f64.powi(3)).abs() < 1e-14);
        let v = GridField::from_fn(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let m2 = young_moment(&YoungMeasure::from_field(&v), 2.0);
        let l2 = crate::grid::lp_norm(&v, 2.0).powi(2);
        assert!((m2 - l2).abs() < 1e-12);
    }

    #[test]
    fn kinetic_young_measure_mass() {
        let g = TorusGrid::new(1, 16).unwrap();
        let v = GridField::from_fn(g, |x| (2.0 * PI * x[0]).cos()).unwrap();
        let xi = XiGrid::covering(-1.0, 1.0, 32).unwrap();
        let nu = YoungMeasure::from_kinetic(&kinetic_function(&v, &xi), g.cell_volume());
        assert!(nu.mass_defect() < 1e-12);
    }

    #[test]
    fn oscillation_second_moment() {
        let g = TorusGrid::new(1, 4096).unwrap();
        let u = GridField::from_fn(g, |x| (2.0 * PI * 64.0 * x[0]).sin()).unwrap();
        let nu = local_young_measure(&u, 16).unwrap();
        for i in 0..16 {
            assert!((nu.fiber_moment(i, 2.0) - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn constant_sequence_is_fixed_point() {
        let g = TorusGrid::new(1, 32).unwrap();
        let xi = XiGrid::covering(-1.0, 1.0, 40).unwrap();
        let u = GridField::from_fn(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let f = kinetic_function(&u, &xi);
        let tests = vec![SeparableTest {
            alpha: (0..32)
                .map(|i| (2.0 * PI * i as f64 / 32.0).cos())
                .collect(),
            gamma: XiFactor::Bump {
                center: 0.2,
                width: 0.5,
            },
        }];
        let r =
            weak_convergence_check(&[f.clone(), f.clone()], &f, &tests, g.cell_volume()).unwrap();
        assert_eq!(r.max_gap, 0.0);
    }
}
