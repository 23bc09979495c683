//! Periodic lattice on the unit torus T^N (N = 1 or 2), fields on it, finite
//! difference operators, mollifiers and the two W^{σ,1} semi-norms.
//!
//! Layout: a field on an `n`-point grid stores `n^N` values row-major over
//! wrapped indices, i.e. `values[i0 * n + i1]` in 2D, with node `i` sitting at
//! `x = i * dx`. Checkpoints rely on this layout.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{KinError, Result};
use crate::quadrature;

/// Rungs per octave of the geometric ε-ladder used for the sup in p^σ_ρ.
pub const LADDER_RUNGS_PER_OCTAVE: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(KinError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if n < 4 {
            return Err(KinError::InvalidGrid(format!(
                "need at least 4 points per dimension, got {n}"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Volume of one cell, dx^N.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Diameter of the unit cube, √N.
    pub fn diameter(&self) -> f64 {
        (self.dim as f64).sqrt()
    }

    /// Number of grid points, n^N.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Wrap a signed index into `0..n`.
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.n as isize) as usize
    }

    /// Per-axis indices of a flat index (second entry is 0 in 1D).
    pub fn coords(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn flat(&self, c: [usize; 2]) -> usize {
        if self.dim == 1 {
            c[0]
        } else {
            c[0] * self.n + c[1]
        }
    }

    /// Flat index of the neighbour `delta` steps away along `axis`.
    pub fn shift(&self, idx: usize, axis: usize, delta: isize) -> usize {
        let mut c = self.coords(idx);
        c[axis] = self.wrap(c[axis] as isize + delta);
        self.flat(c)
    }

    /// Flat index of `idx + offset` with per-axis wrapping.
    pub fn add(&self, idx: usize, offset: usize) -> usize {
        let a = self.coords(idx);
        let b = self.coords(offset);
        self.flat([(a[0] + b[0]) % self.n, (a[1] + b[1]) % self.n])
    }

    /// Physical coordinates of a node (second entry is 0 in 1D).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let c = self.coords(idx);
        [c[0] as f64 * self.dx(), c[1] as f64 * self.dx()]
    }

    /// Minimum-image offset of a flat offset index, in cells, per axis.
    pub fn min_image(&self, offset: usize) -> [i64; 2] {
        let c = self.coords(offset);
        let n = self.n as i64;
        let wrap = |k: usize| {
            let k = k as i64;
            if k > n / 2 {
                k - n
            } else {
                k
            }
        };
        if self.dim == 1 {
            [wrap(c[0]), 0]
        } else {
            [wrap(c[0]), wrap(c[1])]
        }
    }

    /// Torus distance of a flat offset from the origin.
    pub fn offset_distance(&self, offset: usize) -> f64 {
        let m = self.min_image(offset);
        ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt() * self.dx()
    }

    /// Wrapped Euclidean distance between two points of the torus.
    pub fn torus_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .take(self.dim)
            .map(|(x, y)| {
                let d = (x - y).rem_euclid(1.0);
                let d = d.min(1.0 - d);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Real values on a [`TorusGrid`]; entries are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(KinError::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample `f(x)` at every node; `x` has length `dim`.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: TorusGrid, f: F) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                f(&p[..grid.dim()])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// ∫ u dx as a Riemann sum.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(KinError::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Central-difference gradient, one component field per axis.
pub fn gradient(field: &GridField) -> Vec<GridField> {
    let g = field.grid;
    let inv = 1.0 / (2.0 * g.dx());
    (0..g.dim())
        .map(|axis| {
            let values = (0..g.len())
                .map(|i| {
                    (field.values[g.shift(i, axis, 1)] - field.values[g.shift(i, axis, -1)]) * inv
                })
                .collect();
            GridField { grid: g, values }
        })
        .collect()
}

/// |∇u|² per node from the central-difference gradient.
pub fn grad_sq(field: &GridField) -> Vec<f64> {
    let g = field.grid;
    let inv = 1.0 / (2.0 * g.dx());
    (0..g.len())
        .map(|i| {
            (0..g.dim())
                .map(|axis| {
                    let d = (field.values[g.shift(i, axis, 1)]
                        - field.values[g.shift(i, axis, -1)])
                        * inv;
                    d * d
                })
                .sum()
        })
        .collect()
}

/// Second-difference Laplacian, summed over axes.
pub fn laplacian(field: &GridField) -> GridField {
    let g = field.grid;
    let inv = 1.0 / (g.dx() * g.dx());
    let values = (0..g.len())
        .map(|i| {
            let c = field.values[i];
            (0..g.dim())
                .map(|axis| {
                    field.values[g.shift(i, axis, 1)] - 2.0 * c + field.values[g.shift(i, axis, -1)]
                })
                .sum::<f64>()
                * inv
        })
        .collect();
    GridField { grid: g, values }
}

/// Discrete L^p norm (Σ|u|^p dx^N)^{1/p}; `p = ∞` gives the max norm.
pub fn lp_norm(field: &GridField, p: f64) -> f64 {
    if p.is_infinite() {
        return field.max_abs();
    }
    let s: f64 = field.values.iter().map(|v| v.abs().powf(p)).sum();
    (s * field.grid.cell_volume()).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MollifierKind {
    /// Piecewise-linear radial profile (1 - r)_+.
    #[default]
    Triangular,
    /// exp(-1 / (1 - r²)) on r < 1.
    SmoothBump,
}

impl MollifierKind {
    pub fn profile(&self, r: f64) -> f64 {
        match self {
            MollifierKind::Triangular => (1.0 - r).max(0.0),
            MollifierKind::SmoothBump => {
                if r < 1.0 {
                    (-1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn profile_derivative(&self, r: f64) -> f64 {
        match self {
            MollifierKind::Triangular => {
                if r < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            MollifierKind::SmoothBump => {
                if r < 1.0 {
                    let q = 1.0 - r * r;
                    -2.0 * r / (q * q) * (-1.0 / q).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Constant c_N with ∫_{R^N} c_N ρ(|x|) dx = 1.
    pub fn continuum_normalization(&self, dim: usize) -> f64 {
        let mass = match (self, dim) {
            (MollifierKind::Triangular, 1) => 1.0,
            (MollifierKind::Triangular, _) => PI / 3.0,
            (kind, 1) => 2.0 * quadrature::integrate(|r| kind.profile(r), 0.0, 1.0, &[], 1e-14),
            (kind, _) => {
                2.0 * PI * quadrature::integrate(|r| r * kind.profile(r), 0.0, 1.0, &[], 1e-14)
            }
        };
        1.0 / mass
    }

    /// sup of the normalized kernel, the constant of p^σ_ρ ≤ C p^σ.
    pub fn sup_normalized(&self, dim: usize) -> f64 {
        self.continuum_normalization(dim) * self.profile(0.0)
    }
}

/// Radial approximation of the identity ρ_ε(x) = ε^{-N} ρ(|x|/ε).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub kind: MollifierKind,
    pub epsilon: f64,
}

impl Mollifier {
    pub fn new(kind: MollifierKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(KinError::Invalid(format!(
                "mollifier radius must be positive, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn triangular(epsilon: f64) -> Result<Self> {
        Self::new(MollifierKind::Triangular, epsilon)
    }

    /// Kernel values at every flat offset, normalized so that Σ w dx^N = 1.
    pub fn weights(&self, grid: &TorusGrid) -> Vec<f64> {
        let raw: Vec<f64> = (0..grid.len())
            .map(|s| self.kind.profile(grid.offset_distance(s) / self.epsilon))
            .collect();
        let mass: f64 = raw.iter().sum::<f64>() * grid.cell_volume();
        raw.into_iter().map(|w| w / mass).collect()
    }

    /// ∇ρ_ε at every flat offset, using the same discrete normalization as
    /// [`Mollifier::weights`]. The origin gets a zero gradient.
    pub fn gradient_weights(&self, grid: &TorusGrid) -> Vec<[f64; 2]> {
        let raw_mass: f64 = (0..grid.len())
            .map(|s| self.kind.profile(grid.offset_distance(s) / self.epsilon))
            .sum::<f64>()
            * grid.cell_volume();
        (0..grid.len())
            .map(|s| {
                let d = grid.offset_distance(s);
                if d == 0.0 {
                    return [0.0, 0.0];
                }
                let m = grid.min_image(s);
                let dp = self.kind.profile_derivative(d / self.epsilon) / (self.epsilon * raw_mass);
                let dx = grid.dx();
                [dp * m[0] as f64 * dx / d, dp * m[1] as f64 * dx / d]
            })
            .collect()
    }
}

/// D(s) = Σ_x |u(x) - u(x+s)| dx^N for every flat offset s.
pub fn offset_l1_differences(field: &GridField) -> Vec<f64> {
    let g = field.grid;
    let vol = g.cell_volume();
    (0..g.len())
        .map(|s| {
            (0..g.len())
                .map(|i| (field.values[i] - field.values[g.add(i, s)]).abs())
                .sum::<f64>()
                * vol
        })
        .collect()
}

/// Cell-pair kernel in cell units:
/// W(s) = ∫_{[-1,1]^N} Π(1-|r_a|) |s + r|^{-N-σ} dr,
/// i.e. the exact double integral of |x-y|^{-N-σ} over two cells offset by s.
fn cell_pair_kernel(dim: usize, offset: [i64; 2], sigma: f64) -> f64 {
    if dim == 1 {
        let k = offset[0].unsigned_abs() as f64;
        debug_assert!(k >= 1.0);
        let e = 1.0 - sigma;
        let f = |x: f64| if x > 0.0 { x.powf(e) } else { 0.0 };
        return -(f(k + 1.0) - 2.0 * f(k) + f(k - 1.0)) / (sigma * e);
    }
    let s = [offset[0] as f64, offset[1] as f64];
    let integrand = |r0: f64, r1: f64| {
        let a = s[0] + r0;
        let b = s[1] + r1;
        let d2 = a * a + b * b;
        if d2 == 0.0 {
            return 0.0;
        }
        (1.0 - r0.abs()) * (1.0 - r1.abs()) * d2.powf(-(2.0 + sigma) / 2.0)
    };
    let singular = offset[0].abs() <= 1 && offset[1].abs() <= 1;
    let mut total = 0.0;
    for (x0, x1) in [(-1.0, 0.0), (0.0, 1.0)] {
        for (y0, y1) in [(-1.0, 0.0), (0.0, 1.0)] {
            total += if singular {
                graded_box(&integrand, [x0, x1], [y0, y1], [-s[0], -s[1]], 48)
            } else {
                gl_box(&integrand, [x0, x1], [y0, y1])
            };
        }
    }
    total
}

fn gl_box<F: Fn(f64, f64) -> f64>(f: &F, xr: [f64; 2], yr: [f64; 2]) -> f64 {
    quadrature::gl_interval(
        &|x| quadrature::gl_interval(&|y| f(x, y), yr[0], yr[1]),
        xr[0],
        xr[1],
    )
}

/// Box integral with geometric refinement towards `sing` when it is a corner
/// of the box; otherwise plain tensor Gauss–Legendre.
fn graded_box<F: Fn(f64, f64) -> f64>(
    f: &F,
    xr: [f64; 2],
    yr: [f64; 2],
    sing: [f64; 2],
    depth: u32,
) -> f64 {
    let is_corner =
        (sing[0] == xr[0] || sing[0] == xr[1]) && (sing[1] == yr[0] || sing[1] == yr[1]);
    if !is_corner || depth == 0 {
        return if is_corner { 0.0 } else { gl_box(f, xr, yr) };
    }
    let xm = 0.5 * (xr[0] + xr[1]);
    let ym = 0.5 * (yr[0] + yr[1]);
    let mut total = 0.0;
    for xs in [[xr[0], xm], [xm, xr[1]]] {
        for ys in [[yr[0], ym], [ym, yr[1]]] {
            let corner =
                (sing[0] == xs[0] || sing[0] == xs[1]) && (sing[1] == ys[0] || sing[1] == ys[1]);
            total += if corner {
                graded_box(f, xs, ys, sing, depth - 1)
            } else {
                gl_box(f, xs, ys)
            };
        }
    }
    total
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 1.0 {
        Ok(())
    } else {
        Err(KinError::InvalidSigma(sigma))
    }
}

/// p^σ(u) = ∫∫ |u(x)-u(y)| / |x-y|^{N+σ} dx dy.
///
/// The field is read as piecewise constant on cells centred at the nodes and
/// each cell pair is integrated exactly against the kernel (torus distance,
/// minimum image). Diagonal pairs contribute nothing.
pub fn seminorm_p_sigma(field: &GridField, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let d = offset_l1_differences(field);
    Ok(p_sigma_from_differences(&field.grid, &d, sigma))
}

pub(crate) fn p_sigma_from_differences(grid: &TorusGrid, diffs: &[f64], sigma: f64) -> f64 {
    let scale = grid.dx().powf(-sigma);
    (1..grid.len())
        .filter(|&s| diffs[s] != 0.0)
        .map(|s| diffs[s] * cell_pair_kernel(grid.dim(), grid.min_image(s), sigma))
        .sum::<f64>()
        * scale
}

/// The geometric ε-ladder 2D_N·2^{-j/r}, j = 0..r·⌈log₂(2D_N/dx)⌉.
pub fn epsilon_ladder(grid: &TorusGrid) -> Vec<f64> {
    let top = 2.0 * grid.diameter();
    let octaves = (top / grid.dx()).log2().ceil() as u32;
    let r = LADDER_RUNGS_PER_OCTAVE;
    (0..=octaves * r)
        .map(|j| top * 2f64.powf(-(j as f64) / r as f64))
        .collect()
}

/// ε^{-σ} ∫∫ |u(x)-u(y)| ρ_ε(x-y) dx dy at a single radius.
pub fn mollified_modulus(field: &GridField, sigma: f64, mollifier: &Mollifier) -> f64 {
    let d = offset_l1_differences(field);
    mollified_modulus_from_differences(&field.grid, &d, sigma, mollifier)
}

pub(crate) fn mollified_modulus_from_differences(
    grid: &TorusGrid,
    diffs: &[f64],
    sigma: f64,
    mollifier: &Mollifier,
) -> f64 {
    let w = mollifier.weights(grid);
    let s: f64 = w.iter().zip(diffs).map(|(a, b)| a * b).sum();
    mollifier.epsilon.powf(-sigma) * s * grid.cell_volume()
}

/// p^σ_ρ(u): supremum of the mollified modulus over the ε-ladder.
pub fn seminorm_p_sigma_rho(field: &GridField, sigma: f64, kind: MollifierKind) -> Result<f64> {
    check_sigma(sigma)?;
    let d = offset_l1_differences(field);
    Ok(p_sigma_rho_from_differences(&field.grid, &d, sigma, kind))
}

pub(crate) fn p_sigma_rho_from_differences(
    grid: &TorusGrid,
    diffs: &[f64],
    sigma: f64,
    kind: MollifierKind,
) -> f64 {
    epsilon_ladder(grid)
        .into_iter()
        .map(|eps| {
            mollified_modulus_from_differences(
                grid,
                diffs,
                sigma,
                &Mollifier { kind, epsilon: eps },
            )
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    #[test]
    fn build_grid_basics() {
        let g = grid1(8);
        assert_eq!(g.dx(), 0.125);
        assert_eq!(g.wrap(-1), 7);
        let g2 = TorusGrid::new(2, 16).unwrap();
        assert!((g2.diameter() - 2f64.sqrt()).abs() < 1e-15);
        assert!(TorusGrid::new(3, 8).is_err());
        assert!(TorusGrid::new(1, 3).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid1(4);
        assert!(GridField::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(GridField::new(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn operators_annihilate_constants() {
        for g in [grid1(16), TorusGrid::new(2, 8).unwrap()] {
            let c = GridField::constant(g, 3.7);
            assert!(gradient(&c)
                .iter()
                .all(|f| f.values.iter().all(|&v| v == 0.0)));
            assert!(laplacian(&c).values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn gradient_of_sine_taylor_bound() {
        let g = grid1(64);
        let u = GridField::from_fn(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let du = &gradient(&u)[0];
        let bound = (2.0 * PI).powi(3) * g.dx().powi(2) / 6.0;
        for i in 0..g.len() {
            let exact = 2.0 * PI * (2.0 * PI * g.point(i)[0]).cos();
            assert!((du.values[i] - exact).abs() < bound);
        }
    }

    #[test]
    fn gradient_discrete_symbol_of_cosine() {
        // D_c cos(2πx) = -sin(2πdx)/dx · sin(2πx)
        let g = grid1(8);
        let dx = g.dx();
        let u = GridField::from_fn(g, |x| (2.0 * PI * x[0]).cos()).unwrap();
        let du = &gradient(&u)[0];
        let symbol = -(2.0 * PI) * (2.0 * PI * dx).sin() / (2.0 * PI * dx);
        for i in 0..g.len() {
            let expect = symbol * (2.0 * PI * g.point(i)[0]).sin();
            assert!((du.values[i] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn laplacian_eigenvalue_and_conservation() {
        let g = grid1(32);
        let dx = g.dx();
        let u = GridField::from_fn(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
        let lu = laplacian(&u);
        let lam = -(2.0 - 2.0 * (2.0 * PI * dx).cos()) / (dx * dx);
        for i in 0..g.len() {
            assert!((lu.values[i] - lam * u.values[i]).abs() < 1e-10);
        }
        let g2 = TorusGrid::new(2, 8).unwrap();
        let v = GridField::from_fn(g2, |x| (x[0] * 7.0).sin() + x[1] * x[1]).unwrap();
        assert!(laplacian(&v).values.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn lp_norm_cases() {
        let g = grid1(64);
        assert!((lp_norm(&GridField::constant(g, -2.5), 3.0) - 2.5).abs() < 1e-14);
        let s = GridField::from_fn(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
        assert!((lp_norm(&s, 2.0) - 0.5f64.sqrt()).abs() < g.dx().powi(2));
    }

    #[test]
    fn mollifier_mass_is_one() {
        for g in [grid1(64), TorusGrid::new(2, 16).unwrap()] {
            for kind in [MollifierKind::Triangular, MollifierKind::SmoothBump] {
                for eps in [0.01, 0.1, 0.37, 1.5] {
                    let w = Mollifier::new(kind, eps).unwrap().weights(&g);
                    let mass: f64 = w.iter().sum::<f64>() * g.cell_volume();
                    assert!((mass - 1.0).abs() < 1e-12);
                    assert!(w.iter().all(|&v| v >= 0.0));
                }
            }
        }
    }

    #[test]
    fn seminorms_vanish_on_constants_and_are_homogeneous() {
        let g = grid1(32);
        let c = GridField::constant(g, 1.3);
        assert_eq!(seminorm_p_sigma(&c, 0.5).unwrap(), 0.0);
        assert_eq!(
            seminorm_p_sigma_rho(&c, 0.5, MollifierKind::Triangular).unwrap(),
            0.0
        );
        let u = GridField::from_fn(g, |x| (2.0 * PI * x[0]).sin() + (x[0] * 3.0).floor()).unwrap();
        let p = seminorm_p_sigma(&u, 0.4).unwrap();
        let pc = seminorm_p_sigma(&u.scaled(-2.0), 0.4).unwrap();
        assert!((pc - 2.0 * p).abs() < 1e-12 * p);
        assert!(seminorm_p_sigma(&u, 1.0).is_err());
        assert!(seminorm_p_sigma_rho(&u, 0.0, MollifierKind::Triangular).is_err());
    }

    #[test]
    fn cell_kernel_2d_matches_far_field() {
        // far from the diagonal the cell-pair integral approaches the midpoint value
        let w = cell_pair_kernel(2, [12, 5], 0.5);
        let mid = (144.0f64 + 25.0).powf(-1.25);
        assert!((w / mid - 1.0).abs() < 5e-3);
        let near = cell_pair_kernel(2, [1, 0], 0.5);
        assert!(near.is_finite() && near > 1.0);
    }

    #[test]
    fn ladder_spans_down_to_dx() {
        let g = grid1(64);
        let l = epsilon_ladder(&g);
        assert_eq!(l[0], 2.0);
        assert!(*l.last().unwrap() <= g.dx() * 1.0000001);
    }
}
