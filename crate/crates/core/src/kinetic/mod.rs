//! Kinetic layer: ξ-grids, kinetic functions f = 1_{u>ξ} and χ_f, empirical
//! Young measures, the kinetic measure histogram, weak-form and entropy
//! residuals, and time-atom detection.

mod atoms;
mod measure;
mod residual;
mod young;

pub use atoms::{atom_threshold, detect_time_atoms, TimeAtom};
pub use measure::{KineticMeasure, MeasureTail};
pub use residual::{
    entropy_residual, kinetic_weak_residual, pde_weak_residual, EntropyResidual, EntropyWeight,
    MTerm, SpaceFactor, TestFunction, TimeFactor, WeakResidual, XiFactor,
};
pub use young::{
    local_young_measure, weak_convergence_check, young_moment, ConvergenceReport, SeparableTest,
    YoungMeasure,
};

use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::grid::{GridField, TorusGrid};

/// Uniform ξ bins whose edges are the integer multiples `(lo_index + j)·dxi`,
/// so 0 is always an edge and widening never moves existing bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiGrid {
    pub dxi: f64,
    pub lo_index: i64,
    pub bins: usize,
}

impl XiGrid {
    pub fn new(dxi: f64, lo_index: i64, bins: usize) -> Result<Self> {
        if !(dxi > 0.0 && dxi.is_finite()) || bins == 0 {
            return Err(KinError::Invalid(format!(
                "bad xi grid: dxi={dxi}, bins={bins}"
            )));
        }
        Ok(Self {
            dxi,
            lo_index,
            bins,
        })
    }

    /// Covers [lo, hi] plus a 10% margin and at least two spare bins per side,
    /// using roughly `target_bins` bins.
    pub fn covering(lo: f64, hi: f64, target_bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(KinError::Invalid(format!("bad xi range [{lo}, {hi}]")));
        }
        let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
        let pad = 0.1 * span;
        let dxi = (span + 2.0 * pad) / target_bins.max(1) as f64;
        Self::with_spacing(lo - pad, hi + pad, dxi)
    }

    /// Bins of width `dxi` covering [lo, hi] with two spare bins per side.
    pub fn with_spacing(lo: f64, hi: f64, dxi: f64) -> Result<Self> {
        if !(dxi > 0.0) {
            return Err(KinError::Invalid("dxi must be positive".into()));
        }
        let lo_index = (lo / dxi).floor() as i64 - 2;
        let hi_index = (hi / dxi).ceil() as i64 + 2;
        Self::new(dxi, lo_index, (hi_index - lo_index) as usize)
    }

    pub fn xi_min(&self) -> f64 {
        self.lo_index as f64 * self.dxi
    }

    pub fn xi_max(&self) -> f64 {
        (self.lo_index + self.bins as i64) as f64 * self.dxi
    }

    pub fn edge(&self, j: usize) -> f64 {
        (self.lo_index + j as i64) as f64 * self.dxi
    }

    pub fn center(&self, j: usize) -> f64 {
        ((self.lo_index + j as i64) as f64 + 0.5) * self.dxi
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins).map(|j| self.center(j)).collect()
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins).map(|j| self.edge(j)).collect()
    }

    /// Absolute bin index ⌊ξ/dxi⌋ (not offset by `lo_index`).
    pub fn absolute_index(&self, xi: f64) -> i64 {
        (xi / self.dxi).floor() as i64
    }

    /// Bin containing ξ, if inside the grid.
    pub fn bin_of(&self, xi: f64) -> Option<usize> {
        let j = self.absolute_index(xi) - self.lo_index;
        (0..self.bins as i64).contains(&j).then_some(j as usize)
    }

    /// Smallest widening of `self` that keeps ξ two bins away from either end.
    pub fn widened_to(&self, xi: f64) -> Self {
        let a = self.absolute_index(xi);
        let lo = self.lo_index.min(a - 2);
        let hi = (self.lo_index + self.bins as i64).max(a + 3);
        Self {
            dxi: self.dxi,
            lo_index: lo,
            bins: (hi - lo) as usize,
        }
    }

    pub fn same_bins(&self, other: &XiGrid) -> bool {
        self.dxi == other.dxi && self.lo_index == other.lo_index && self.bins == other.bins
    }
}

/// f(x_i, ξ_j) sampled at bin centers, row-major `[point][xi bin]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticFunction {
    pub xi: XiGrid,
    pub n_points: usize,
    pub values: Vec<f64>,
}

impl KineticFunction {
    pub fn new(xi: XiGrid, n_points: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_points * xi.bins {
            return Err(KinError::Invalid(format!(
                "kinetic function needs {} values, got {}",
                n_points * xi.bins,
                values.len()
            )));
        }
        crate::grid::check_finite(&values)?;
        Ok(Self {
            xi,
            n_points,
            values,
        })
    }

    /// A single fiber f(ξ) evaluated at bin centers.
    pub fn from_profile<F: Fn(f64) -> f64>(xi: XiGrid, f: F) -> Self {
        let values = xi.centers().into_iter().map(f).collect();
        Self {
            xi,
            n_points: 1,
            values,
        }
    }

    pub fn fiber(&self, i: usize) -> &[f64] {
        &self.values[i * self.xi.bins..(i + 1) * self.xi.bins]
    }

    /// Checks range [0,1] and monotonicity in ξ.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for i in 0..self.n_points {
            let fib = self.fiber(i);
            for (j, &v) in fib.iter().enumerate() {
                if v < -tol || v > 1.0 + tol {
                    return Err(KinError::Invalid(format!(
                        "f = {v} outside [0,1] at ({i},{j})"
                    )));
                }
                if j > 0 && v > fib[j - 1] + tol {
                    return Err(KinError::Invalid(format!("f increases in xi at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    /// Young-measure weights ν = -Δ_ξ f per fiber, located at the bin edges:
    /// entry e carries f(ξ_{e-1}) - f(ξ_e) with f ≡ 1 below and 0 above the grid.
    pub fn young_weights(&self, i: usize) -> Vec<f64> {
        let fib = self.fiber(i);
        let b = self.xi.bins;
        (0..=b)
            .map(|e| {
                let left = if e == 0 { 1.0 } else { fib[e - 1] };
                let right = if e == b { 0.0 } else { fib[e] };
                left - right
            })
            .collect()
    }
}

/// f(x, ξ_j) = 1_{u(x) > ξ_j} at bin centers.
pub fn kinetic_function(u: &GridField, xi: &XiGrid) -> KineticFunction {
    let centers = xi.centers();
    let mut values = Vec::with_capacity(u.values.len() * xi.bins);
    for &v in &u.values {
        values.extend(centers.iter().map(|&c| if v > c { 1.0 } else { 0.0 }));
    }
    KineticFunction {
        xi: *xi,
        n_points: u.values.len(),
        values,
    }
}

/// χ_f = f - 1_{0>ξ}, same layout as f.
pub fn chi(f: &KineticFunction) -> Vec<f64> {
    let centers = f.xi.centers();
    f.values
        .chunks(f.xi.bins)
        .flat_map(|fib| {
            fib.iter()
                .zip(&centers)
                .map(|(v, c)| v - if *c < 0.0 { 1.0 } else { 0.0 })
        })
        .collect()
}

/// u(x) = Σ_j χ(x, ξ_j) Δξ on the given grid.
pub fn reconstruct_u(f: &KineticFunction, grid: TorusGrid) -> Result<GridField> {
    if f.n_points != grid.len() {
        return Err(KinError::Incompatible(format!(
            "kinetic function has {} points, grid has {}",
            f.n_points,
            grid.len()
        )));
    }
    let c = chi(f);
    let values = c
        .chunks(f.xi.bins)
        .map(|fib| fib.iter().sum::<f64>() * f.xi.dxi)
        .collect();
    GridField::new(grid, values)
}

/// Σ_j |ξ_j|^p |χ(x, ξ_j)| Δξ per point.
pub fn chi_moment(f: &KineticFunction, p: f64) -> Vec<f64> {
    let centers = f.xi.centers();
    chi(f)
        .chunks(f.xi.bins)
        .map(|fib| {
            fib.iter()
                .zip(&centers)
                .map(|(x, c)| c.abs().powf(p) * x.abs())
                .sum::<f64>()
                * f.xi.dxi
        })
        .collect()
}

/// CSV rows (x, xi, f) for a kinetic function on a 1D or 2D grid; 2D points
/// are written with their flat index as x.
pub fn write_kinetic_csv<W: std::io::Write>(
    f: &KineticFunction,
    grid: Option<&TorusGrid>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "xi", "f"])?;
    let centers = f.xi.centers();
    for i in 0..f.n_points {
        let x = match grid {
            Some(g) if g.dim() == 1 => g.point(i)[0],
            _ => i as f64,
        };
        for (j, c) in centers.iter().enumerate() {
            w.serialize((x, c, f.values[i * f.xi.bins + j]))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    #[test]
    fn xi_grid_geometry() {
        let x = XiGrid::covering(-1.0, 1.0, 20).unwrap();
        assert!(x.xi_min() <= -1.2 - 2.0 * x.dxi + 1e-12);
        assert!(x.xi_max() >= 1.2 + 2.0 * x.dxi - 1e-12);
        assert!(x.edges().contains(&0.0));
        let w = x.widened_to(5.0);
        assert!(w.bin_of(5.0).is_some());
        assert_eq!(w.lo_index, x.lo_index);
        assert_eq!(w.center(3), x.center(3));
        assert_eq!(x.bin_of(100.0), None);
    }

    #[test]
    fn heaviside_fibers() {
        let xi = XiGrid::covering(-1.0, 1.0, 40).unwrap();
        let f = kinetic_function(&GridField::zeros(g(4)), &xi);
        for (j, c) in xi.centers().iter().enumerate() {
            assert_eq!(f.fiber(0)[j], if *c < 0.0 { 1.0 } else { 0.0 });
        }
        f.validate(0.0).unwrap();
        let two = GridField::new(g(4), vec![-1.0, 1.0, -1.0, 1.0]).unwrap();
        let f2 = kinetic_function(&two, &xi);
        f2.validate(0.0).unwrap();
        for (j, c) in xi.centers().iter().enumerate() {
            assert_eq!(f2.fiber(0)[j], if *c < -1.0 { 1.0 } else { 0.0 });
            assert_eq!(f2.fiber(1)[j], if *c < 1.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn chi_values() {
        let xi = XiGrid::with_spacing(-3.0, 3.0, 0.25).unwrap();
        let u = GridField::new(g(4), vec![2.0, -1.0, 0.0, 0.3]).unwrap();
        let c = chi(&kinetic_function(&u, &xi));
        let centers = xi.centers();
        for (j, x) in centers.iter().enumerate() {
            let c0 = c[j];
            let c1 = c[xi.bins + j];
            assert_eq!(c0, if *x > 0.0 && *x < 2.0 { 1.0 } else { 0.0 });
            assert_eq!(c1, if *x > -1.0 && *x < 0.0 { -1.0 } else { 0.0 });
        }
    }

    #[test]
    fn round_trip_within_half_bin() {
        let grid = g(64);
        let xi = XiGrid::covering(-2.0, 2.0, 37).unwrap();
        let u = GridField::from_fn(grid, |x| {
            1.7 * (2.0 * std::f64::consts::PI * x[0]).sin() + 0.1
        })
        .unwrap();
        let back = reconstruct_u(&kinetic_function(&u, &xi), grid).unwrap();
        for (a, b) in u.values.iter().zip(&back.values) {
            assert!((a - b).abs() <= 0.5 * xi.dxi + 1e-12);
        }
        let c = GridField::constant(grid, 0.77);
        let back = reconstruct_u(&kinetic_function(&c, &xi), grid).unwrap();
        assert!(back
            .values
            .iter()
            .all(|v| (v - 0.77).abs() <= 0.5 * xi.dxi + 1e-12));
    }

    #[test]
    fn young_weights_are_probabilities() {
        let xi = XiGrid::covering(-1.0, 1.0, 16).unwrap();
        let u = GridField::new(g(4), vec![0.1, -0.5, 0.9, 0.0]).unwrap();
        let f = kinetic_function(&u, &xi);
        for i in 0..4 {
            let w = f.young_weights(i);
            assert!(w.iter().all(|v| *v >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let pos: f64 = w.iter().enumerate().map(|(e, v)| v * xi.edge(e)).sum();
            assert!((pos - u.values[i]).abs() <= 0.5 * xi.dxi + 1e-12);
        }
    }

    #[test]
    fn chi_moment_matches_power() {
        let xi = XiGrid::with_spacing(-2.0, 2.0, 1e-3).unwrap();
        let u = GridField::new(g(4), vec![1.5, -1.0, 0.0, 0.5]).unwrap();
        let m = chi_moment(&kinetic_function(&u, &xi), 2.0);
        for (mi, ui) in m.iter().zip(&u.values) {
            let exact = ui.abs().powi(3) / 3.0;
            assert!((mi - exact).abs() < 5e-3, "{mi} vs {exact}");
        }
    }
}
