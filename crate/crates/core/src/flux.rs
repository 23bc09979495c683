//! Catalog fluxes A(ξ) = A_s(ξ)·d with derivative a = A', the growth majorant
//! Γ(ξ,ζ) = C(1 + |ξ|^{p-1} + |ζ|^{p-1}), and entropy fluxes.

use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::quadrature;

/// Flux block of the JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSpec {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(rename = "growth_C", default)]
    pub growth_c: Option<f64>,
    #[serde(default)]
    pub growth_p: Option<u32>,
    /// Unit direction of the flux in 2D; ignored in 1D.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

impl Default for FluxSpec {
    fn default() -> Self {
        Self {
            name: "burgers".into(),
            params: Default::default(),
            growth_c: None,
            growth_p: None,
            direction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FluxKind {
    /// A(u) = u²/2
    Burgers,
    /// A(u) = c u
    Linear { c: f64 },
    /// A(u) = u³/3
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxModel {
    pub kind: FluxKind,
    pub dim: usize,
    pub direction: [f64; 2],
    pub growth_c: f64,
    pub growth_p: u32,
}

impl FluxModel {
    pub fn new(kind: FluxKind, dim: usize) -> Self {
        let (growth_c, growth_p) = match kind {
            FluxKind::Burgers => (1.0, 2),
            FluxKind::Linear { .. } => (1.0, 1),
            FluxKind::Cubic => (1.0, 3),
        };
        Self {
            kind,
            dim,
            direction: [1.0, 0.0],
            growth_c,
            growth_p,
        }
    }

    pub fn burgers(dim: usize) -> Self {
        Self::new(FluxKind::Burgers, dim)
    }

    pub fn linear(c: f64, dim: usize) -> Self {
        Self::new(FluxKind::Linear { c }, dim)
    }

    pub fn cubic(dim: usize) -> Self {
        Self::new(FluxKind::Cubic, dim)
    }

    pub fn with_growth(mut self, c: f64, p: u32) -> Self {
        self.growth_c = c;
        self.growth_p = p;
        self
    }

    pub fn from_spec(spec: &FluxSpec, dim: usize) -> Result<Self> {
        let kind = match spec.name.as_str() {
            "burgers" => FluxKind::Burgers,
            "cubic" => FluxKind::Cubic,
            "linear" => {
                let c = spec
                    .params
                    .get("c")
                    .and_then(|v| v.as_f64())
                    .ok_or_else(|| KinError::InvalidFlux("linear flux needs params.c".into()))?;
                FluxKind::Linear { c }
            }
            other => return Err(KinError::InvalidFlux(format!("unknown flux '{other}'"))),
        };
        let mut model = Self::new(kind, dim);
        if let Some(c) = spec.growth_c {
            model.growth_c = c;
        }
        if let Some(p) = spec.growth_p {
            if p < 1 {
                return Err(KinError::InvalidFlux("growth_p must be ≥ 1".into()));
            }
            model.growth_p = p;
        }
        if dim == 2 {
            if let Some(d) = &spec.direction {
                if d.len() != 2 {
                    return Err(KinError::InvalidFlux(
                        "direction must have 2 entries".into(),
                    ));
                }
                let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if norm == 0.0 || !norm.is_finite() {
                    return Err(KinError::InvalidFlux("direction must be nonzero".into()));
                }
                model.direction = [d[0] / norm, d[1] / norm];
            }
        }
        Ok(model)
    }

    /// Scalar profile A_s with A = A_s·d.
    pub fn profile(&self, xi: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => 0.5 * xi * xi,
            FluxKind::Linear { c } => c * xi,
            FluxKind::Cubic => xi * xi * xi / 3.0,
        }
    }

    /// Scalar speed a_s = A_s'.
    pub fn speed(&self, xi: f64) -> f64 {
        match self.kind {
            FluxKind::Burgers => xi,
            FluxKind::Linear { c } => c,
            FluxKind::Cubic => xi * xi,
        }
    }

    pub fn eval_a_flux(&self, xi: f64) -> Vec<f64> {
        let s = self.profile(xi);
        self.direction[..self.dim].iter().map(|d| s * d).collect()
    }

    pub fn eval_a(&self, xi: f64) -> Vec<f64> {
        let s = self.speed(xi);
        self.direction[..self.dim].iter().map(|d| s * d).collect()
    }

    /// max |a| over |ξ| ≤ bound.
    pub fn max_speed(&self, bound: f64) -> f64 {
        let b = bound.abs();
        match self.kind {
            FluxKind::Burgers => b,
            FluxKind::Linear { c } => c.abs(),
            FluxKind::Cubic => b * b,
        }
    }

    /// max |a_s| on the interval spanned by two states; |a_s| is quasi-convex
    /// for every catalog flux so the endpoints suffice.
    pub fn local_speed(&self, u: f64, v: f64) -> f64 {
        self.speed(u).abs().max(self.speed(v).abs())
    }

    pub fn gamma(&self, xi: f64, zeta: f64) -> f64 {
        let e = self.growth_p as i32 - 1;
        self.growth_c * (1.0 + xi.abs().powi(e) + zeta.abs().powi(e))
    }

    /// Antiderivative of |x|^{p-1}: sign(x)|x|^p / p.
    pub(crate) fn gamma_power_antiderivative(&self, x: f64) -> f64 {
        let p = self.growth_p as i32;
        x.signum() * x.abs().powi(p) / p as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub max_ratio: f64,
    pub pairs_checked: usize,
    pub pairs_skipped: usize,
    pub pass: bool,
}

/// max over lattice pairs of |a(ξ)-a(ζ)| / (Γ(ξ,ζ)|ξ-ζ|); ξ = ζ is skipped.
pub fn check_gamma(model: &FluxModel, lattice: &[f64]) -> GammaReport {
    let mut max_ratio = 0.0f64;
    let mut checked = 0;
    let mut skipped = 0;
    for &xi in lattice {
        for &zeta in lattice {
            if xi == zeta {
                skipped += 1;
                continue;
            }
            let r = (model.speed(xi) - model.speed(zeta)).abs()
                / (model.gamma(xi, zeta) * (xi - zeta).abs());
            max_ratio = max_ratio.max(r);
            checked += 1;
        }
    }
    GammaReport {
        max_ratio,
        pairs_checked: checked,
        pairs_skipped: skipped,
        pass: max_ratio <= 1.0,
    }
}

/// Uniform verification lattice on [-r, r] with `m` points.
pub fn default_lattice(r: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| -r + 2.0 * r * i as f64 / (m - 1) as f64)
        .collect()
}

/// Convex C² entropies with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Entropy {
    /// η(u) = slope·u
    Linear { slope: f64 },
    /// η(u) = u²
    Quadratic,
    /// η(u) = |u|^p, p ≥ 2
    Power { p: f64 },
}

impl Entropy {
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Entropy::Linear { slope } => slope * u,
            Entropy::Quadratic => u * u,
            Entropy::Power { p } => u.abs().powf(p),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            Entropy::Linear { slope } => slope,
            Entropy::Quadratic => 2.0 * u,
            Entropy::Power { p } => p * u.signum() * u.abs().powf(p - 1.0),
        }
    }

    pub fn second(&self, u: f64) -> f64 {
        match *self {
            Entropy::Linear { .. } => 0.0,
            Entropy::Quadratic => 2.0,
            Entropy::Power { p } => p * (p - 1.0) * u.abs().powf(p - 2.0),
        }
    }
}

/// Scalar entropy flux q_s(u) = ∫_0^u a_s(ξ) η'(ξ) dξ by Gauss–Legendre.
pub fn entropy_flux_profile(model: &FluxModel, eta_prime: &dyn Fn(f64) -> f64, u: f64) -> f64 {
    quadrature::integrate(|x| model.speed(x) * eta_prime(x), 0.0, u, &[0.0], 1e-12)
}

/// q(u) = ∫_0^u a(ξ) η'(ξ) dξ as a vector in R^N.
pub fn entropy_flux(model: &FluxModel, eta_prime: &dyn Fn(f64) -> f64, u: f64) -> Vec<f64> {
    let s = entropy_flux_profile(model, eta_prime, u);
    model.direction[..model.dim].iter().map(|d| s * d).collect()
}

/// Entropy flux profile with closed forms where available.
pub fn entropy_flux_closed(model: &FluxModel, entropy: &Entropy, u: f64) -> f64 {
    match (entropy, model.kind) {
        (Entropy::Linear { slope }, _) => slope * (model.profile(u) - model.profile(0.0)),
        (Entropy::Quadratic, FluxKind::Burgers) => 2.0 * u * u * u / 3.0,
        (Entropy::Quadratic, FluxKind::Linear { c }) => c * u * u,
        (Entropy::Quadratic, FluxKind::Cubic) => 0.5 * u.powi(4),
        (e, _) => entropy_flux_profile(model, &|x| e.derivative(x), u),
    }
}
