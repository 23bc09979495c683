//! Discrete weak-form residuals of the kinetic equation, the conservative
//! PDE, and the entropy inequality along a stored path.
//!
//! Kinetic residual for a separable test φ = α(x)β(t)γ(ξ) with β(T) = 0:
//!
//!   R = ∫⟨χ,∂_tφ⟩ + ⟨χ₀,φ(0)⟩ + ∫⟨χ, a·∇φ + ηΔφ⟩
//!       + Σ_k ∫∫ g_k φ(x,t,u) dx dβ_k + ½∫∫ ∂_ξφ(x,t,u) G² dx dt - m(∂_ξφ),
//!
//! which vanishes for the viscous equation. χ = f - 1_{0>ξ} replaces f; the
//! two give the same identity since 1_{0>ξ} solves the kinetic equation.
//! Time integrals are left-point sums on the solver's steps with the path's
//! own increments; ∂_tφ enters through exact increments of β. ξ-integrals
//! are exact: ⟨χ_u, γ⟩ = ∫_0^u γ.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::KineticMeasure;
use crate::error::{KinError, Result};
use crate::flux::{entropy_flux_closed, Entropy};
use crate::quadrature;
use crate::solver::{PathHistory, SolverConfig};

/// α(x) ∈ {1, cos(2πk·x), sin(2πk·x)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceFactor {
    One,
    Cos { k: [i32; 2] },
    Sin { k: [i32; 2] },
}

impl SpaceFactor {
    fn phase(k: [i32; 2], x: &[f64]) -> f64 {
        2.0 * PI * x.iter().zip(k).map(|(xi, ki)| xi * ki as f64).sum::<f64>()
    }

    fn wave(k: [i32; 2], dim: usize) -> [f64; 2] {
        let mut w = [0.0; 2];
        for i in 0..dim {
            w[i] = 2.0 * PI * k[i] as f64;
        }
        w
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            SpaceFactor::One => 1.0,
            SpaceFactor::Cos { k } => Self::phase(k, x).cos(),
            SpaceFactor::Sin { k } => Self::phase(k, x).sin(),
        }
    }

    pub fn grad(&self, x: &[f64]) -> [f64; 2] {
        let w = Self::wave(self.k(), x.len());
        let d = match *self {
            SpaceFactor::One => 0.0,
            SpaceFactor::Cos { k } => -Self::phase(k, x).sin(),
            SpaceFactor::Sin { k } => Self::phase(k, x).cos(),
        };
        [w[0] * d, w[1] * d]
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let w = Self::wave(self.k(), x.len());
        -(w[0] * w[0] + w[1] * w[1]) * self.eval(x)
    }

    fn k(&self) -> [i32; 2] {
        match *self {
            SpaceFactor::One => [0, 0],
            SpaceFactor::Cos { k } | SpaceFactor::Sin { k } => k,
        }
    }
}

/// β(t) on [0, T].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFactor {
    /// cos²(πt / 2T)
    CosRamp,
    /// (1 - t/T)²
    QuadRamp,
    /// constant c; admissible only for c = 0
    Constant { c: f64 },
}

impl TimeFactor {
    pub fn eval(&self, t: f64, t_end: f64) -> f64 {
        match *self {
            TimeFactor::CosRamp => (0.5 * PI * t / t_end).cos().powi(2),
            TimeFactor::QuadRamp => (1.0 - t / t_end).powi(2),
            TimeFactor::Constant { c } => c,
        }
    }

    pub fn derivative(&self, t: f64, t_end: f64) -> f64 {
        match *self {
            TimeFactor::CosRamp => -0.5 * PI / t_end * (PI * t / t_end).sin(),
            TimeFactor::QuadRamp => -2.0 * (1.0 - t / t_end) / t_end,
            TimeFactor::Constant { .. } => 0.0,
        }
    }
}

/// γ(ξ) ∈ {1, (1 - r²)³ with r = (ξ - center)/width on |r| < 1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum XiFactor {
    One,
    Bump { center: f64, width: f64 },
}

fn bump_primitive(r: f64) -> f64 {
    let r = r.clamp(-1.0, 1.0);
    let r2 = r * r;
    r * (1.0 - r2 + 0.6 * r2 * r2 - r2 * r2 * r2 / 7.0)
}

impl XiFactor {
    pub fn eval(&self, xi: f64) -> f64 {
        match *self {
            XiFactor::One => 1.0,
            XiFactor::Bump { center, width } => {
                let r = (xi - center) / width;
                if r.abs() < 1.0 {
                    (1.0 - r * r).powi(3)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn derivative(&self, xi: f64) -> f64 {
        match *self {
            XiFactor::One => 0.0,
            XiFactor::Bump { center, width } => {
                let r = (xi - center) / width;
                if r.abs() < 1.0 {
                    -6.0 * r * (1.0 - r * r).powi(2) / width
                } else {
                    0.0
                }
            }
        }
    }

    /// ∫_0^u γ(ξ) dξ.
    pub fn primitive_from_zero(&self, u: f64) -> f64 {
        match *self {
            XiFactor::One => u,
            XiFactor::Bump { center, width } => {
                width * (bump_primitive((u - center) / width) - bump_primitive(-center / width))
            }
        }
    }

    /// ∫_0^u w(ξ) γ(ξ) dξ for a polynomial weight w of degree ≤ 24; exact
    /// Gauss–Legendre on the pieces where γ is polynomial.
    pub fn weighted_primitive<F: Fn(f64) -> f64>(&self, w: &F, u: f64) -> f64 {
        let (lo, hi, sign) = if u >= 0.0 {
            (0.0, u, 1.0)
        } else {
            (u, 0.0, -1.0)
        };
        match *self {
            XiFactor::One => sign * quadrature::gl_interval(w, lo, hi),
            XiFactor::Bump { center, width } => {
                let a = lo.max(center - width);
                let b = hi.min(center + width);
                if a >= b {
                    0.0
                } else {
                    sign * quadrature::gl_interval(&|x| w(x) * self.eval(x), a, b)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub alpha: SpaceFactor,
    pub beta: TimeFactor,
    pub gamma: XiFactor,
}

impl TestFunction {
    pub fn validate(&self, t_end: f64) -> Result<()> {
        let bt = self.beta.eval(t_end, t_end);
        if bt.abs() > 1e-14 {
            return Err(KinError::InvalidTestFunction(format!(
                "beta(T) = {bt} must vanish"
            )));
        }
        if let XiFactor::Bump { width, .. } = self.gamma {
            if !(width > 0.0) {
                return Err(KinError::InvalidTestFunction(
                    "bump width must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// How the m(∂_ξφ) term is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum MTerm<'a> {
    /// η|∇u^n|² δ_{u^n} summed along the path with the same left-point rule.
    PathExact,
    /// Histogram bins, with α at the cell, β at the t-bin center and ∂_ξγ at
    /// the ξ-bin center.
    Histogram(&'a KineticMeasure),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakResidual {
    pub residual: f64,
    pub time_term: f64,
    pub initial_term: f64,
    pub flux_term: f64,
    pub viscous_term: f64,
    pub noise_term: f64,
    pub ito_term: f64,
    pub measure_term: f64,
}

struct Geometry {
    alpha: Vec<f64>,
    /// d·∇α
    alpha_dir: Vec<f64>,
    lap_alpha: Vec<f64>,
}

fn geometry(cfg: &SolverConfig, alpha: &SpaceFactor) -> Geometry {
    let g = cfg.grid;
    let dim = g.dim();
    let d = cfg.flux.direction;
    let mut out = Geometry {
        alpha: vec![],
        alpha_dir: vec![],
        lap_alpha: vec![],
    };
    for i in 0..g.len() {
        let p = g.point(i);
        let x = &p[..dim];
        out.alpha.push(alpha.eval(x));
        let gr = alpha.grad(x);
        out.alpha_dir.push((0..dim).map(|a| gr[a] * d[a]).sum());
        out.lap_alpha.push(alpha.laplacian(x));
    }
    out
}

fn check_history(cfg: &SolverConfig, h: &PathHistory) -> Result<()> {
    if h.states.len() != h.increments.len() + 1 || h.states.is_empty() {
        return Err(KinError::Invalid(
            "history needs S+1 states and S increments".into(),
        ));
    }
    if h.states.iter().any(|s| s.len() != cfg.grid.len()) {
        return Err(KinError::Incompatible(
            "history states do not match the grid".into(),
        ));
    }
    Ok(())
}

/// Residual of the kinetic weak form along a stored path.
pub fn kinetic_weak_residual(
    cfg: &SolverConfig,
    h: &PathHistory,
    phi: &TestFunction,
    m: MTerm,
) -> Result<WeakResidual> {
    phi.validate(cfg.t_end)?;
    check_history(cfg, h)?;
    let g = cfg.grid;
    let vol = g.cell_volume();
    let dx = g.dx();
    let dt = h.dt;
    let t_end = cfg.t_end;
    let geo = geometry(cfg, &phi.alpha);
    let profiles = cfg.noise.profiles_on(&g);
    let flux = &cfg.flux;
    let gamma = phi.gamma;
    let speed = |x: f64| flux.speed(x);

    let mut r = WeakResidual {
        residual: 0.0,
        time_term: 0.0,
        initial_term: 0.0,
        flux_term: 0.0,
        viscous_term: 0.0,
        noise_term: 0.0,
        ito_term: 0.0,
        measure_term: 0.0,
    };
    let pairing = |u: &[f64]| -> f64 {
        u.iter()
            .zip(&geo.alpha)
            .map(|(v, a)| a * gamma.primitive_from_zero(*v))
            .sum::<f64>()
            * vol
    };
    let beta0 = phi.beta.eval(0.0, t_end);
    r.initial_term = pairing(&h.states[0]) * beta0;
    for (n, u) in h.states[..h.steps()].iter().enumerate() {
        let t = n as f64 * dt;
        let b = phi.beta.eval(t, t_end);
        let db = phi.beta.eval(t + dt, t_end) - b;
        let p = pairing(u);
        r.time_term += p * db;
        if b == 0.0 {
            continue;
        }
        let mut flux_s = 0.0;
        let mut visc_s = 0.0;
        let mut ito_s = 0.0;
        let mut meas_s = 0.0;
        let dbeta = &h.increments[n];
        let mut noise_s = 0.0;
        for i in 0..g.len() {
            let ui = u[i];
            let a = geo.alpha[i];
            let gprim = gamma.primitive_from_zero(ui);
            if geo.alpha_dir[i] != 0.0 {
                let ga = match gamma {
                    XiFactor::One => flux.profile(ui) - flux.profile(0.0),
                    _ => gamma.weighted_primitive(&speed, ui),
                };
                flux_s += geo.alpha_dir[i] * ga;
            }
            visc_s += geo.lap_alpha[i] * gprim;
            let gd = gamma.derivative(ui);
            if gd != 0.0 && a != 0.0 {
                let shape = cfg.noise.shape(ui);
                let g2: f64 = profiles.iter().map(|p| (p[i] * shape).powi(2)).sum();
                ito_s += a * gd * g2;
                if matches!(m, MTerm::PathExact) && cfg.eta > 0.0 {
                    let mut gs = 0.0;
                    for axis in 0..g.dim() {
                        let d = (u[g.shift(i, axis, 1)] - u[g.shift(i, axis, -1)]) / (2.0 * dx);
                        gs += d * d;
                    }
                    meas_s += a * gd * cfg.eta * gs;
                }
            }
            if !dbeta.is_empty() && a != 0.0 {
                let gv = gamma.eval(ui);
                if gv != 0.0 {
                    let shape = cfg.noise.shape(ui);
                    let forcing: f64 = profiles.iter().zip(dbeta).map(|(p, db)| p[i] * db).sum();
                    noise_s += a * gv * shape * forcing;
                }
            }
        }
        r.flux_term += b * dt * flux_s * vol;
        r.viscous_term += b * dt * cfg.eta * visc_s * vol;
        r.ito_term += 0.5 * b * dt * ito_s * vol;
        r.measure_term += b * dt * meas_s * vol;
        r.noise_term += b * noise_s * vol;
    }
    if let MTerm::Histogram(hist) = m {
        if hist.n_cells != g.len() {
            return Err(KinError::Incompatible(
                "histogram cells differ from the grid".into(),
            ));
        }
        let centers = hist.xi.centers();
        let mut s = 0.0;
        for tb in 0..hist.t_bins {
            let b = phi.beta.eval(hist.t_bin_center(tb), t_end);
            for c in 0..hist.n_cells {
                for (j, xc) in centers.iter().enumerate() {
                    let w = hist.weight(tb, c, j);
                    if w != 0.0 {
                        s += w * geo.alpha[c] * b * gamma.derivative(*xc);
                    }
                }
            }
        }
        r.measure_term = s;
    }
    r.residual =
        r.time_term + r.initial_term + r.flux_term + r.viscous_term + r.noise_term + r.ito_term
            - r.measure_term;
    Ok(r)
}

/// Residual of the conservative weak form
/// ∫∫u∂_tφ + ∫u₀φ(0) + ∫∫(A(u)·∇φ + ηuΔφ) + Σ_k∫∫g_kφ dβ_k for φ = α(x)β(t),
/// computed directly from the field values.
pub fn pde_weak_residual(
    cfg: &SolverConfig,
    h: &PathHistory,
    alpha: &SpaceFactor,
    beta: &TimeFactor,
) -> Result<f64> {
    TestFunction {
        alpha: *alpha,
        beta: *beta,
        gamma: XiFactor::One,
    }
    .validate(cfg.t_end)?;
    check_history(cfg, h)?;
    let g = cfg.grid;
    let vol = g.cell_volume();
    let geo = geometry(cfg, alpha);
    let profiles = cfg.noise.profiles_on(&g);
    let dt = h.dt;
    let t_end = cfg.t_end;
    let inner = |u: &[f64]| u.iter().zip(&geo.alpha).map(|(v, a)| v * a).sum::<f64>() * vol;
    let mut total = inner(&h.states[0]) * beta.eval(0.0, t_end);
    for (n, u) in h.states[..h.steps()].iter().enumerate() {
        let t = n as f64 * dt;
        let b = beta.eval(t, t_end);
        total += inner(u) * (beta.eval(t + dt, t_end) - b);
        let mut s = 0.0;
        let mut noise = 0.0;
        for i in 0..g.len() {
            s += geo.alpha_dir[i] * cfg.flux.profile(u[i]) + cfg.eta * geo.lap_alpha[i] * u[i];
            if !h.increments[n].is_empty() {
                let shape = cfg.noise.shape(u[i]);
                let f: f64 = profiles
                    .iter()
                    .zip(&h.increments[n])
                    .map(|(p, db)| p[i] * db)
                    .sum();
                noise += geo.alpha[i] * shape * f;
            }
        }
        total += b * (dt * s + noise) * vol;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyResidual {
    /// ⟨η(u(t)),θ⟩ - ⟨η(u(s)),θ⟩ - ∫⟨q(u),∇θ⟩ - Σ∫⟨g_kη'(u),θ⟩dβ_k - ½∫⟨G²η''(u),θ⟩
    pub residual: f64,
    /// η ∫∫ θ η''(u) |∇u|², i.e. m(θ ⊗ η'')
    pub dissipation: f64,
    /// η ∫∫ η(u) Δθ, the viscous flux of entropy
    pub viscous: f64,
}

/// θ(x) = offset + amp·α(x) with offset ≥ |amp| so that θ ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyWeight {
    pub offset: f64,
    pub amp: f64,
    pub factor: SpaceFactor,
}

impl EntropyWeight {
    pub fn uniform() -> Self {
        Self {
            offset: 1.0,
            amp: 0.0,
            factor: SpaceFactor::One,
        }
    }
}

/// Entropy-inequality residual between the steps nearest to times s ≤ t.
pub fn entropy_residual(
    cfg: &SolverConfig,
    h: &PathHistory,
    entropy: &Entropy,
    theta: &EntropyWeight,
    s: f64,
    t: f64,
) -> Result<EntropyResidual> {
    check_history(cfg, h)?;
    if theta.offset < theta.amp.abs() {
        return Err(KinError::InvalidTestFunction(
            "entropy weight must be nonnegative".into(),
        ));
    }
    if !(0.0 <= s && s <= t && t <= cfg.t_end * (1.0 + 1e-12)) {
        return Err(KinError::InvalidTestFunction(format!(
            "need 0 ≤ s ≤ t ≤ T, got s={s}, t={t}"
        )));
    }
    let g = cfg.grid;
    let vol = g.cell_volume();
    let dx = g.dx();
    let dt = h.dt;
    let ns = ((s / dt).round() as usize).min(h.steps());
    let nt = ((t / dt).round() as usize).min(h.steps());
    let geo = geometry(cfg, &theta.factor);
    let th: Vec<f64> = geo
        .alpha
        .iter()
        .map(|a| theta.offset + theta.amp * a)
        .collect();
    let th_dir: Vec<f64> = geo.alpha_dir.iter().map(|a| theta.amp * a).collect();
    let th_lap: Vec<f64> = geo.lap_alpha.iter().map(|a| theta.amp * a).collect();
    let profiles = cfg.noise.profiles_on(&g);
    let pair = |u: &[f64]| {
        u.iter()
            .zip(&th)
            .map(|(v, w)| entropy.value(*v) * w)
            .sum::<f64>()
            * vol
    };
    let mut res = pair(&h.states[nt]) - pair(&h.states[ns]);
    let mut dissipation = 0.0;
    let mut viscous = 0.0;
    for n in ns..nt {
        let u = &h.states[n];
        let mut flux_s = 0.0;
        let mut ito_s = 0.0;
        let mut noise_s = 0.0;
        let mut diss_s = 0.0;
        let mut visc_s = 0.0;
        for i in 0..g.len() {
            let ui = u[i];
            if th_dir[i] != 0.0 {
                flux_s += entropy_flux_closed(&cfg.flux, entropy, ui) * th_dir[i];
            }
            let e2 = entropy.second(ui);
            let shape = cfg.noise.shape(ui);
            if !profiles.is_empty() {
                let g2: f64 = profiles.iter().map(|p| (p[i] * shape).powi(2)).sum();
                ito_s += g2 * e2 * th[i];
                let f: f64 = profiles
                    .iter()
                    .zip(&h.increments[n])
                    .map(|(p, db)| p[i] * db)
                    .sum();
                noise_s += shape * f * entropy.derivative(ui) * th[i];
            }
            if cfg.eta > 0.0 {
                let mut gs = 0.0;
                for axis in 0..g.dim() {
                    let d = (u[g.shift(i, axis, 1)] - u[g.shift(i, axis, -1)]) / (2.0 * dx);
                    gs += d * d;
                }
                diss_s += th[i] * e2 * gs;
                visc_s += entropy.value(ui) * th_lap[i];
            }
        }
        res -= (dt * flux_s + noise_s + 0.5 * dt * ito_s) * vol;
        dissipation += cfg.eta * dt * diss_s * vol;
        viscous += cfg.eta * dt * visc_s * vol;
    }
    Ok(EntropyResidual {
        residual: res,
        dissipation,
        viscous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_derivatives() {
        let h = 1e-6;
        for a in [
            SpaceFactor::Cos { k: [2, 0] },
            SpaceFactor::Sin { k: [1, 0] },
        ] {
            let x = 0.37;
            let fd = (a.eval(&[x + h]) - a.eval(&[x - h])) / (2.0 * h);
            assert!((fd - a.grad(&[x])[0]).abs() < 1e-6);
            let l = (a.eval(&[x + 1e-4]) - 2.0 * a.eval(&[x]) + a.eval(&[x - 1e-4])) / 1e-8;
            assert!((l - a.laplacian(&[x])).abs() < 1e-3);
        }
        for b in [TimeFactor::CosRamp, TimeFactor::QuadRamp] {
            assert!(b.eval(2.0, 2.0).abs() < 1e-15);
            let fd = (b.eval(0.7 + h, 2.0) - b.eval(0.7 - h, 2.0)) / (2.0 * h);
            assert!((fd - b.derivative(0.7, 2.0)).abs() < 1e-8);
        }
        let g = XiFactor::Bump {
            center: 0.3,
            width: 0.5,
        };
        let fd = (g.eval(0.5 + h) - g.eval(0.5 - h)) / (2.0 * h);
        assert!((fd - g.derivative(0.5)).abs() < 1e-8);
        let q = quadrature::integrate(|x| g.eval(x), 0.0, 0.65, &[-0.2, 0.8], 1e-14);
        assert!((g.primitive_from_zero(0.65) - q).abs() < 1e-13);
        assert!(
            (g.primitive_from_zero(5.0) - g.primitive_from_zero(-5.0) - 0.5 * 32.0 / 35.0).abs()
                < 1e-14
        );
        let wq = quadrature::integrate(|x| x * x * g.eval(x), 0.0, -0.1, &[-0.2, 0.8], 1e-14);
        assert!((g.weighted_primitive(&|x| x * x, -0.1) - wq).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonvanishing_beta() {
        let phi = TestFunction {
            alpha: SpaceFactor::One,
            beta: TimeFactor::Constant { c: 1.0 },
            gamma: XiFactor::One,
        };
        assert!(phi.validate(1.0).is_err());
        let zero = TestFunction {
            beta: TimeFactor::Constant { c: 0.0 },
            ..phi
        };
        assert!(zero.validate(1.0).is_ok());
    }
}
