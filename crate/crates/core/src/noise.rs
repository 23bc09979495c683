//! Finite-mode forcing Σ_k g_k(x,u) dβ_k: the mode catalog, the structural
//! constants D0/D1, and keyed Brownian increments.
//!
//! Mode k has wavenumber k and spatial profile a_k cos(2πk·θ(x)), where
//! θ(x) = x in 1D and x₁+x₂ in 2D, with a_k = amplitude·k^{-q} (a_0 =
//! amplitude). Multiplicative modes carry an extra factor s(u).
//!
//! Increments: for a path seed `p`, the ChaCha20 generator with key bytes
//! `p (LE u64) ‖ level (LE u32) ‖ node (LE u32) ‖ 0…` and stream id equal to
//! the coarse step index emits K standard normals (ziggurat) in mode order.
//! Level 0 gives the base increments √dt·Z; level ℓ > 0 nodes carry the
//! Brownian-bridge midpoints that split base steps dyadically, so runs with
//! dt and dt/2^ℓ see the same Brownian path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{KinError, Result};
use crate::grid::{GridField, TorusGrid};

/// Noise block of the JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// "none", "additive" or "multiplicative".
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(rename = "K", default)]
    pub k: usize,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub decay_q: f64,
    /// "sin", "rational" (u/(1+u²)) or "clamp".
    #[serde(default)]
    pub shape_s: Option<String>,
    #[serde(default = "one")]
    pub alpha: f64,
    /// Clamp level M for the clamp shape.
    #[serde(default)]
    pub clamp_m: Option<f64>,
    /// Wavenumber of the first mode; 0 admits the spatially uniform mode.
    #[serde(default = "one_usize")]
    pub first_wavenumber: usize,
    #[serde(rename = "D0", default)]
    pub d0: Option<f64>,
    #[serde(rename = "D1", default)]
    pub d1: Option<f64>,
}

fn default_kind() -> String {
    "none".into()
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            k: 0,
            amplitude: 1.0,
            decay_q: 1.0,
            shape_s: None,
            alpha: 1.0,
            clamp_m: None,
            first_wavenumber: 1,
            d0: None,
            d1: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Shape {
    Sin,
    /// u / (1 + u²)
    Rational,
    Clamp {
        m: f64,
    },
}

impl Shape {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Shape::Sin => u.sin(),
            Shape::Rational => u / (1.0 + u * u),
            Shape::Clamp { m } => u.clamp(-m, m),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        1.0
    }

    /// sup s².
    pub fn sup_sq(&self) -> f64 {
        match *self {
            Shape::Sin => 1.0,
            Shape::Rational => 0.25,
            Shape::Clamp { m } => m * m,
        }
    }

    /// Constant c with s(u)² ≤ c(1 + u²).
    fn growth_sq(&self) -> f64 {
        match *self {
            Shape::Rational => 0.25,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Additive,
    Multiplicative(Shape),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub wavenumber: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub dim: usize,
    pub kind: NoiseKind,
    pub modes: Vec<Mode>,
    pub d0: f64,
    pub d1: f64,
    /// Exponent of the modulus h(r) = r^α.
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub max_ratio: f64,
    pub declared: f64,
    pub samples: usize,
    pub skipped: usize,
    pub pass: bool,
}

/// K Gaussian increments for one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementBatch {
    pub dt: f64,
    pub dbeta: Vec<f64>,
    pub path_seed: u64,
    pub step_index: u64,
}

impl NoiseModel {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            kind: NoiseKind::Additive,
            modes: vec![],
            d0: 0.0,
            d1: 0.0,
            alpha: 1.0,
        }
    }

    /// Catalog model with the smallest constants this module can certify.
    pub fn catalog(
        dim: usize,
        kind: NoiseKind,
        k: usize,
        amplitude: f64,
        decay_q: f64,
        first: usize,
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(KinError::InvalidNoise(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !amplitude.is_finite() || !decay_q.is_finite() {
            return Err(KinError::InvalidNoise(
                "amplitude and decay_q must be finite".into(),
            ));
        }
        if let NoiseKind::Multiplicative(Shape::Clamp { m }) = kind {
            if !(m > 0.0 && m.is_finite()) {
                return Err(KinError::InvalidNoise(
                    "clamp level must be positive".into(),
                ));
            }
        }
        let modes = (first..first + k)
            .map(|w| Mode {
                wavenumber: w,
                amplitude: if w == 0 {
                    amplitude
                } else {
                    amplitude * (w as f64).powf(-decay_q)
                },
            })
            .collect();
        let mut model = Self {
            dim,
            kind,
            modes,
            d0: 0.0,
            d1: 0.0,
            alpha,
        };
        model.d0 = model.certified_d0();
        model.d1 = model.certified_d1();
        Ok(model)
    }

    pub fn additive(dim: usize, k: usize, amplitude: f64, decay_q: f64) -> Result<Self> {
        Self::catalog(dim, NoiseKind::Additive, k, amplitude, decay_q, 1, 1.0)
    }

    pub fn multiplicative(
        dim: usize,
        shape: Shape,
        k: usize,
        amplitude: f64,
        decay_q: f64,
    ) -> Result<Self> {
        Self::catalog(
            dim,
            NoiseKind::Multiplicative(shape),
            k,
            amplitude,
            decay_q,
            1,
            1.0,
        )
    }

    pub fn k(&self) -> usize {
        self.modes.len()
    }

    pub fn is_additive(&self) -> bool {
        self.kind == NoiseKind::Additive
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|m| m.amplitude == 0.0)
    }

    fn lipschitz_x_factor(&self) -> f64 {
        if self.dim == 2 {
            2f64.sqrt()
        } else {
            1.0
        }
    }

    fn sum_a2(&self) -> f64 {
        self.modes.iter().map(|m| m.amplitude * m.amplitude).sum()
    }

    fn certified_d0(&self) -> f64 {
        match self.kind {
            NoiseKind::Additive => self.sum_a2(),
            NoiseKind::Multiplicative(s) => self.sum_a2() * s.growth_sq(),
        }
    }

    fn certified_d1(&self) -> f64 {
        let l = self.lipschitz_x_factor();
        self.modes
            .iter()
            .map(|m| {
                let a2 = m.amplitude * m.amplitude;
                let kx = (2.0 * PI * m.wavenumber as f64 * l).powi(2);
                match self.kind {
                    NoiseKind::Additive => a2 * kx,
                    NoiseKind::Multiplicative(s) => {
                        let lip2 = s.lipschitz().powi(2);
                        let cs = if self.alpha >= 1.0 {
                            lip2
                        } else {
                            lip2.max(4.0 * s.sup_sq())
                        };
                        if m.wavenumber == 0 {
                            a2 * cs
                        } else {
                            2.0 * a2 * (kx * s.sup_sq()).max(cs)
                        }
                    }
                }
            })
            .sum()
    }

    /// Builds from a config block and verifies the declared constants.
    pub fn from_spec(spec: &NoiseSpec, dim: usize) -> Result<Self> {
        let kind = match spec.kind.as_str() {
            "none" => return Ok(Self::zero(dim)),
            "additive" => NoiseKind::Additive,
            "multiplicative" => {
                let shape = match spec.shape_s.as_deref().unwrap_or("sin") {
                    "sin" => Shape::Sin,
                    "rational" => Shape::Rational,
                    "clamp" => Shape::Clamp {
                        m: spec.clamp_m.unwrap_or(1.0),
                    },
                    other => {
                        return Err(KinError::InvalidNoise(format!("unknown shape '{other}'")))
                    }
                };
                NoiseKind::Multiplicative(shape)
            }
            other => {
                return Err(KinError::InvalidNoise(format!(
                    "unknown noise kind '{other}'"
                )))
            }
        };
        let mut model = Self::catalog(
            dim,
            kind,
            spec.k,
            spec.amplitude,
            spec.decay_q,
            spec.first_wavenumber,
            spec.alpha,
        )?;
        if let Some(d0) = spec.d0 {
            model.d0 = d0;
        }
        if let Some(d1) = spec.d1 {
            model.d1 = d1;
        }
        let r0 = verify_d0(&model, 4.0, 65);
        if !r0.pass {
            return Err(KinError::InvalidNoise(format!(
                "declared D0 = {} fails: max ratio {}",
                model.d0, r0.max_ratio
            )));
        }
        let r1 = verify_d1(&model, &default_d1_samples(dim));
        if !r1.pass {
            return Err(KinError::InvalidNoise(format!(
                "declared D1 = {} fails: max ratio {}",
                model.d1, r1.max_ratio
            )));
        }
        Ok(model)
    }

    fn theta(&self, x: &[f64]) -> f64 {
        x.iter().take(self.dim).sum()
    }

    /// Spatial factor a_k cos(2πk θ(x)).
    pub fn profile(&self, k: usize, x: &[f64]) -> f64 {
        let m = &self.modes[k];
        m.amplitude * (2.0 * PI * m.wavenumber as f64 * self.theta(x)).cos()
    }

    pub fn shape(&self, u: f64) -> f64 {
        match self.kind {
            NoiseKind::Additive => 1.0,
            NoiseKind::Multiplicative(s) => s.eval(u),
        }
    }

    pub fn g(&self, k: usize, x: &[f64], u: f64) -> f64 {
        self.profile(k, x) * self.shape(u)
    }

    /// G²(x,u) = Σ_k g_k(x,u)².
    pub fn g2(&self, x: &[f64], u: f64) -> f64 {
        let v = self.g2_unchecked(x, u);
        debug_assert!(v <= self.d0 * (1.0 + u * u) * (1.0 + 1e-12) + 1e-300);
        v
    }

    fn g2_unchecked(&self, x: &[f64], u: f64) -> f64 {
        let s = self.shape(u);
        (0..self.k())
            .map(|k| self.profile(k, x).powi(2))
            .sum::<f64>()
            * s
            * s
    }

    /// Modulus h(r) = r^α.
    pub fn h(&self, r: f64) -> f64 {
        r.powf(self.alpha)
    }

    /// Spatial factors tabulated on a grid: `[k][cell]`.
    pub fn profiles_on(&self, grid: &TorusGrid) -> Vec<Vec<f64>> {
        (0..self.k())
            .map(|k| {
                (0..grid.len())
                    .map(|i| self.profile(k, &grid.point(i)[..grid.dim()]))
                    .collect()
            })
            .collect()
    }

    /// Field k holds g_k(x, u(x)).
    pub fn diffusion_apply(&self, u: &GridField) -> Vec<GridField> {
        let grid = u.grid;
        (0..self.k())
            .map(|k| GridField {
                grid,
                values: (0..grid.len())
                    .map(|i| self.g(k, &grid.point(i)[..grid.dim()], u.values[i]))
                    .collect(),
            })
            .collect()
    }
}

/// max over a u-lattice on [-r, r] (and x ∈ {0, 1/8, …}) of G²/(1+u²).
pub fn verify_d0(model: &NoiseModel, r: f64, n_samples: usize) -> BoundReport {
    let xs: Vec<[f64; 2]> = (0..8)
        .flat_map(|i| (0..8).map(move |j| [i as f64 / 8.0, j as f64 / 8.0]))
        .collect();
    let mut max_ratio = 0.0f64;
    let mut samples = 0;
    for i in 0..n_samples {
        let u = if n_samples > 1 {
            -r + 2.0 * r * i as f64 / (n_samples - 1) as f64
        } else {
            0.0
        };
        for x in &xs {
            max_ratio = max_ratio.max(model.g2_unchecked(&x[..model.dim], u) / (1.0 + u * u));
            samples += 1;
        }
    }
    BoundReport {
        max_ratio,
        declared: model.d0,
        samples,
        skipped: 0,
        pass: max_ratio <= model.d0 * (1.0 + 1e-12),
    }
}

/// A sample point (x, u) for the D1 check.
pub type SamplePoint = ([f64; 2], f64);

/// The documented D1 lattice: x on a 1/16 grid in 1D or a 6×6 grid in 2D,
/// u ∈ {-3, -2.75, …, 3} plus a few near-coincident values.
pub fn default_d1_samples(dim: usize) -> Vec<SamplePoint> {
    let xs: Vec<[f64; 2]> = if dim == 1 {
        (0..16).map(|i| [i as f64 / 16.0, 0.0]).collect()
    } else {
        (0..6)
            .flat_map(|i| (0..6).map(move |j| [i as f64 / 6.0, j as f64 / 6.0]))
            .collect()
    };
    let mut us: Vec<f64> = (0..25).map(|i| -3.0 + 0.25 * i as f64).collect();
    us.extend([1e-3, -1e-3, 0.01, 0.5 + 1e-3]);
    xs.iter()
        .flat_map(|x| us.iter().map(move |&u| (*x, u)))
        .collect()
}

/// max over sample pairs of Σ|g_k(x,u)-g_k(y,v)|² / (|x-y|² + |u-v|h(|u-v|)).
pub fn verify_d1(model: &NoiseModel, samples: &[SamplePoint]) -> BoundReport {
    let grid_dist = |a: &[f64; 2], b: &[f64; 2]| -> f64 {
        (0..model.dim)
            .map(|i| {
                let d = (a[i] - b[i]).abs().rem_euclid(1.0);
                let d = d.min(1.0 - d);
                d * d
            })
            .sum::<f64>()
    };
    let mut max_ratio = 0.0f64;
    let mut count = 0;
    let mut skipped = 0;
    for (x, u) in samples {
        for (y, v) in samples {
            let dx2 = grid_dist(x, y);
            let du = (u - v).abs();
            let denom = dx2 + du * model.h(du);
            if denom == 0.0 {
                skipped += 1;
                continue;
            }
            let num: f64 = (0..model.k())
                .map(|k| {
                    (model.g(k, &x[..model.dim], *u) - model.g(k, &y[..model.dim], *v)).powi(2)
                })
                .sum();
            max_ratio = max_ratio.max(num / denom);
            count += 1;
        }
    }
    BoundReport {
        max_ratio,
        declared: model.d1,
        samples: count,
        skipped,
        pass: max_ratio <= model.d1 * (1.0 + 1e-12),
    }
}

fn keyed_rng(path_seed: u64, level: u32, node: u32, stream: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&path_seed.to_le_bytes());
    key[8..12].copy_from_slice(&level.to_le_bytes());
    key[12..16].copy_from_slice(&node.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn standard_normals(rng: &mut ChaCha20Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

/// Base-level increments: K draws of N(0, dt) keyed by (path_seed, step_index, k).
pub fn sample_increments(
    model: &NoiseModel,
    dt: f64,
    path_seed: u64,
    step_index: u64,
) -> IncrementBatch {
    assert!(dt > 0.0, "dt must be positive");
    let mut rng = keyed_rng(path_seed, 0, 0, step_index);
    let sd = dt.sqrt();
    IncrementBatch {
        dt,
        dbeta: standard_normals(&mut rng, model.k())
            .into_iter()
            .map(|z| sd * z)
            .collect(),
        path_seed,
        step_index,
    }
}

/// The 2^level sub-increments of base step `coarse_index` (base step size
/// `dt_coarse`), from the dyadic Brownian bridge. Level 0 returns the base
/// increment itself; the sub-increments always sum to it exactly in real
/// arithmetic.
pub fn refined_increments(
    model: &NoiseModel,
    dt_coarse: f64,
    level: u32,
    path_seed: u64,
    coarse_index: u64,
) -> Vec<IncrementBatch> {
    let k = model.k();
    let base = sample_increments(model, dt_coarse, path_seed, coarse_index);
    let mut blocks = vec![base.dbeta];
    let mut h = dt_coarse;
    for l in 1..=level {
        let mut next = Vec::with_capacity(blocks.len() * 2);
        // conditional law of the midpoint of a Brownian increment over h:
        // W(h/2) | W(h) = w  ~  N(w/2, h/4)
        let sd = (h / 4.0).sqrt();
        for (node, w) in blocks.iter().enumerate() {
            let mut rng = keyed_rng(path_seed, l, node as u32, coarse_index);
            let z = standard_normals(&mut rng, k);
            let left: Vec<f64> = w.iter().zip(&z).map(|(w, z)| 0.5 * w + sd * z).collect();
            let right: Vec<f64> = w.iter().zip(&left).map(|(w, l)| w - l).collect();
            next.push(left);
            next.push(right);
        }
        blocks = next;
        h *= 0.5;
    }
    let n = blocks.len() as u64;
    blocks
        .into_iter()
        .enumerate()
        .map(|(j, dbeta)| IncrementBatch {
            dt: h,
            dbeta,
            path_seed,
            step_index: coarse_index * n + j as u64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model() {
        let m = NoiseModel::from_spec(&NoiseSpec::default(), 1).unwrap();
        assert_eq!(m.k(), 0);
        assert_eq!(m.g2(&[0.3], 5.0), 0.0);
        assert_eq!(verify_d0(&m, 4.0, 9).max_ratio, 0.0);
        let g = TorusGrid::new(1, 8).unwrap();
        assert!(m.diffusion_apply(&GridField::zeros(g)).is_empty());
    }

    #[test]
    fn single_cos_mode() {
        let m = NoiseModel::additive(1, 1, 1.0, 1.0).unwrap();
        assert_eq!(m.d0, 1.0);
        assert!((m.g2(&[0.0], 0.0) - 1.0).abs() < 1e-15);
        let r = verify_d0(&m, 4.0, 65);
        assert!(r.pass && r.max_ratio <= 1.0);
        // additive, u = v: reduces to the spatial Lipschitz check with (2π)²
        let r1 = verify_d1(&m, &default_d1_samples(1));
        assert!(r1.pass);
        assert!(r1.max_ratio <= (2.0 * PI).powi(2));
    }

    #[test]
    fn undersized_d0_fails() {
        let spec = NoiseSpec {
            kind: "additive".into(),
            k: 2,
            d0: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(
            NoiseModel::from_spec(&spec, 1),
            Err(KinError::InvalidNoise(_))
        ));
        let mut m = NoiseModel::additive(1, 1, 1.0, 1.0).unwrap();
        m.d0 = 0.5;
        assert!(!verify_d0(&m, 4.0, 65).pass);
    }

    #[test]
    fn sin_shape_d1() {
        let sigma0 = 0.7;
        let m = NoiseModel::catalog(
            1,
            NoiseKind::Multiplicative(Shape::Sin),
            1,
            sigma0,
            1.0,
            0,
            1.0,
        )
        .unwrap();
        assert!((m.d1 - sigma0 * sigma0).abs() < 1e-15);
        let r = verify_d1(&m, &default_d1_samples(1));
        assert!(r.pass, "{r:?}");
        // ratio ≤ σ₀² means |sin u - sin v| ≤ |u - v|
        assert!(r.max_ratio <= sigma0 * sigma0);
    }

    #[test]
    fn degenerate_pairs_skipped() {
        let m = NoiseModel::additive(1, 2, 1.0, 1.0).unwrap();
        let s = vec![([0.25, 0.0], 1.0)];
        let r = verify_d1(&m, &s);
        assert_eq!(r.skipped, 1);
        assert_eq!(r.samples, 0);
    }

    #[test]
    fn catalog_passes_everywhere() {
        for dim in [1, 2] {
            for kind in [
                NoiseKind::Additive,
                NoiseKind::Multiplicative(Shape::Sin),
                NoiseKind::Multiplicative(Shape::Rational),
                NoiseKind::Multiplicative(Shape::Clamp { m: 2.0 }),
            ] {
                for alpha in [1.0, 0.5] {
                    let m = NoiseModel::catalog(dim, kind, 4, 0.8, 1.5, 1, alpha).unwrap();
                    assert!(verify_d0(&m, 4.0, 65).pass);
                    assert!(
                        verify_d1(&m, &default_d1_samples(dim)).pass,
                        "{kind:?} {alpha}"
                    );
                }
            }
        }
    }

    #[test]
    fn multiplicative_uniform_state() {
        let m = NoiseModel::catalog(
            1,
            NoiseKind::Multiplicative(Shape::Sin),
            1,
            0.3,
            1.0,
            0,
            1.0,
        )
        .unwrap();
        let g = TorusGrid::new(1, 16).unwrap();
        let f = m.diffusion_apply(&GridField::constant(g, PI / 2.0));
        assert!(f[0].values.iter().all(|v| (v - 0.3).abs() < 1e-15));
        let a = NoiseModel::additive(1, 2, 1.0, 1.0).unwrap();
        let f1 = a.diffusion_apply(&GridField::constant(g, 1.0));
        let f2 = a.diffusion_apply(&GridField::constant(g, -4.0));
        assert_eq!(f1, f2);
    }

    #[test]
    fn increments_deterministic() {
        let m = NoiseModel::additive(1, 4, 1.0, 1.0).unwrap();
        let a = sample_increments(&m, 0.01, 42, 7);
        let b = sample_increments(&m, 0.01, 42, 7);
        assert_eq!(a, b);
        assert_ne!(a.dbeta, sample_increments(&m, 0.01, 42, 8).dbeta);
        assert_ne!(a.dbeta, sample_increments(&m, 0.01, 43, 7).dbeta);
    }

    #[test]
    fn increment_statistics() {
        let m = NoiseModel::additive(1, 2, 1.0, 1.0).unwrap();
        let dt = 0.01;
        let n = 100_000;
        let (mut s0, mut s00, mut s1, mut s11, mut s01) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let b = sample_increments(&m, dt, 2024, i);
            s0 += b.dbeta[0];
            s00 += b.dbeta[0] * b.dbeta[0];
            s1 += b.dbeta[1];
            s11 += b.dbeta[1] * b.dbeta[1];
            s01 += b.dbeta[0] * b.dbeta[1];
        }
        let nf = n as f64;
        let mean = s0 / nf;
        let var = s00 / nf - mean * mean;
        assert!(mean.abs() < 4.0 * (dt / nf).sqrt());
        assert!((var - dt).abs() < 0.05 * dt);
        let m1 = s1 / nf;
        let corr = (s01 / nf - mean * m1) / (var * (s11 / nf - m1 * m1)).sqrt();
        assert!(corr.abs() < 0.02);
    }

    #[test]
    fn bridge_refinement_sums_and_variance() {
        let m = NoiseModel::additive(1, 3, 1.0, 1.0).unwrap();
        let dt = 0.02;
        let base = sample_increments(&m, dt, 5, 11);
        let fine = refined_increments(&m, dt, 3, 5, 11);
        assert_eq!(fine.len(), 8);
        for k in 0..3 {
            let s: f64 = fine.iter().map(|b| b.dbeta[k]).sum();
            assert!((s - base.dbeta[k]).abs() < 1e-14);
        }
        assert_eq!(refined_increments(&m, dt, 0, 5, 11)[0], base);
        // fine increments are N(0, dt/4) and uncorrelated with each other
        let mut s = 0.0;
        let mut s2 = 0.0;
        let mut cross = 0.0;
        let n = 20_000;
        for c in 0..n {
            let f = refined_increments(&m, dt, 2, 9, c);
            s += f[0].dbeta[0];
            s2 += f[0].dbeta[0] * f[0].dbeta[0];
            cross += f[0].dbeta[0] * f[3].dbeta[0];
        }
        let nf = n as f64;
        assert!((s2 / nf - dt / 4.0).abs() < 0.05 * dt / 4.0);
        assert!((s / nf).abs() < 4.0 * (dt / 4.0 / nf).sqrt());
        assert!((cross / nf).abs() < 4.0 * dt / 4.0 / nf.sqrt());
    }

    #[test]
    fn noise_block_roundtrip() {
        let spec: NoiseSpec = serde_json::from_str(
            r#"{"kind":"multiplicative","K":4,"amplitude":0.5,"decay_q":2,"shape_s":"rational","alpha":0.5}"#,
        )
        .unwrap();
        let m = NoiseModel::from_spec(&spec, 1).unwrap();
        assert_eq!(m.k(), 4);
        assert_eq!(m.alpha, 0.5);
        assert!((m.modes[1].amplitude - 0.125).abs() < 1e-15);
        let back: NoiseSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
