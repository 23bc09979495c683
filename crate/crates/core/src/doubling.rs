//! Doubling of variables: ψ-antiderivatives, the doubled product integral
//! ∫∫∫∫ ρ_ε(x-y) ψ_δ(ξ-ζ) f₁(x,ξ) f̄₂(y,ζ), the flux and noise remainders
//! I_ρ and I_ψ with their majorants, the Υ kernel and the contraction
//! functional.

use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::flux::FluxModel;
use crate::grid::{Mollifier, TorusGrid};
use crate::harness::reduce::Accumulator;
use crate::kinetic::{chi, KineticFunction, YoungMeasure};
use crate::noise::NoiseModel;
use crate::quadrature;
use crate::solver::PathRun;

/// ψ_δ(r) = δ^{-1} ψ(r/δ) with the hat ψ(s) = (1-|s|)^+ and its first two
/// antiderivatives ψ₁, ψ₂ in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiPair {
    pub delta: f64,
}

/// sup_s |s ψ(s)| for the hat, attained at |s| = 1/2.
pub const C_PSI: f64 = 0.25;

pub fn build_psi(delta: f64) -> Result<PsiPair> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(KinError::Invalid(format!(
            "delta must be positive, got {delta}"
        )));
    }
    Ok(PsiPair { delta })
}

fn base_psi1(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s <= 0.0 {
        0.5 * (1.0 + s) * (1.0 + s)
    } else if s < 1.0 {
        1.0 - 0.5 * (1.0 - s) * (1.0 - s)
    } else {
        1.0
    }
}

fn base_psi2(s: f64) -> f64 {
    if s <= -1.0 {
        0.0
    } else if s <= 0.0 {
        (1.0 + s).powi(3) / 6.0
    } else if s < 1.0 {
        s + (1.0 - s).powi(3) / 6.0
    } else {
        s
    }
}

impl PsiPair {
    pub fn psi(&self, r: f64) -> f64 {
        (1.0 - (r / self.delta).abs()).max(0.0) / self.delta
    }

    /// ∫_{-∞}^r ψ_δ.
    pub fn psi1(&self, r: f64) -> f64 {
        base_psi1(r / self.delta)
    }

    /// ∫_{-∞}^r ψ₁; ψ₂(0) = δ/6 and ψ₂(r) = r for r ≥ δ.
    pub fn psi2(&self, r: f64) -> f64 {
        self.delta * base_psi2(r / self.delta)
    }

    pub fn c_psi(&self) -> f64 {
        C_PSI
    }

    /// sup ψ_δ = 1/δ.
    pub fn sup(&self) -> f64 {
        1.0 / self.delta
    }

    /// ∫∫_{[a,a+h₁]×[b,b+h₂]} ψ_δ(ξ-ζ) dζ dξ.
    pub fn cell_pair(&self, a: f64, h1: f64, b: f64, h2: f64) -> f64 {
        let d = a - b;
        self.psi2(d + h1) - self.psi2(d + h1 - h2) - self.psi2(d) + self.psi2(d - h2)
    }

    /// Numerical audit of the pair on a lattice of `samples` points in
    /// [-2δ, 2δ].
    pub fn check(&self, samples: usize) -> PsiReport {
        let d = self.delta;
        let mass = quadrature::integrate(|r| self.psi(r), -d, d, &[0.0], 1e-14);
        let xs: Vec<f64> = (0..=samples)
            .map(|i| -2.0 * d + 4.0 * d * i as f64 / samples as f64)
            .collect();
        let mut psi1_ok = true;
        let mut psi2_convex = true;
        let mut psi_nonneg = true;
        for w in xs.windows(3) {
            psi_nonneg &= self.psi(w[1]) >= 0.0;
            let (a, b, c) = (self.psi1(w[0]), self.psi1(w[1]), self.psi1(w[2]));
            psi1_ok &= (0.0..=1.0).contains(&b) && a <= b + 1e-15 && b <= c + 1e-15;
            psi2_convex &= self.psi2(w[0]) + self.psi2(w[2]) - 2.0 * self.psi2(w[1]) >= -1e-14;
        }
        let c_psi_numeric = (0..=1000)
            .map(|i| {
                let s = -1.0 + 2.0 * i as f64 / 1000.0;
                (s * (1.0 - s.abs())).abs()
            })
            .fold(0.0, f64::max);
        let tail_offset = self.psi2(3.0 * d) - 3.0 * d;
        let pass = (mass - 1.0).abs() < 1e-12
            && psi_nonneg
            && psi1_ok
            && psi2_convex
            && (self.psi2(0.0) - d / 6.0).abs() < 1e-15
            && tail_offset.abs() < 1e-12
            && (c_psi_numeric - C_PSI).abs() < 1e-12;
        PsiReport {
            delta: d,
            mass,
            psi2_at_zero: self.psi2(0.0),
            tail_offset,
            c_psi: C_PSI,
            c_psi_numeric,
            psi1_monotone_bounded: psi1_ok,
            psi2_convex,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    pub delta: f64,
    pub mass: f64,
    pub psi2_at_zero: f64,
    /// ψ₂(r) - r for r beyond the support.
    pub tail_offset: f64,
    pub c_psi: f64,
    pub c_psi_numeric: f64,
    pub psi1_monotone_bounded: bool,
    pub psi2_convex: bool,
    pub pass: bool,
}

fn check_spatial(n1: usize, n2: usize, grid: &TorusGrid) -> Result<()> {
    if n1 != grid.len() || n2 != grid.len() {
        return Err(KinError::Incompatible(format!(
            "kinetic functions have {n1} and {n2} points, grid has {}",
            grid.len()
        )));
    }
    Ok(())
}

/// ∫∫∫∫ ρ_ε(x-y) ψ_δ(ξ-ζ) f₁(x,ξ) (1 - f₂(y,ζ)) through the four-term χ
/// expansion. Space is a double sum over grid points weighted by
/// ρ_ε dx^{2N}; every ξ-integral is exact for the piecewise-constant fibers.
pub fn doubled_integral(
    f1: &KineticFunction,
    f2: &KineticFunction,
    grid: &TorusGrid,
    rho: &Mollifier,
    psi: &PsiPair,
) -> Result<f64> {
    check_spatial(f1.n_points, f2.n_points, grid)?;
    if f1.xi.dxi != f2.xi.dxi {
        return Err(KinError::Incompatible(format!(
            "xi spacings differ: {} vs {}",
            f1.xi.dxi, f2.xi.dxi
        )));
    }
    let h = f1.xi.dxi;
    let (b1, b2) = (f1.xi.bins, f2.xi.bins);
    let vol = grid.cell_volume();
    let w = rho.weights(grid);
    let support: Vec<usize> = (0..grid.len()).filter(|&s| w[s] != 0.0).collect();
    let c1 = chi(f1);
    let c2 = chi(f2);

    // Kernel by bin offset i - j, shifted by (b2 - 1).
    let base = f1.xi.lo_index - f2.xi.lo_index;
    let kern: Vec<f64> = (0..b1 + b2 - 1)
        .map(|k| {
            let d = (base + k as i64 - (b2 as i64 - 1)) as f64 * h;
            psi.cell_pair(d, h, 0.0, h)
        })
        .collect();

    // conv[y][i] = Σ_j K(i - j) χ₂(y, j)
    let mut conv = vec![0.0; grid.len() * b1];
    for y in 0..grid.len() {
        let row = &c2[y * b2..(y + 1) * b2];
        for i in 0..b1 {
            let mut s = 0.0;
            for (j, c) in row.iter().enumerate() {
                if *c != 0.0 {
                    s += kern[i + b2 - 1 - j] * c;
                }
            }
            conv[y * b1 + i] = s;
        }
    }
    let mut cross = 0.0;
    for x in 0..grid.len() {
        let row = &c1[x * b1..(x + 1) * b1];
        for &s in &support {
            let y = grid.add(x, s);
            let cy = &conv[y * b1..(y + 1) * b1];
            cross += w[s] * row.iter().zip(cy).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    cross *= vol * vol;

    let e1 = f1.xi.edges();
    let p1: Vec<f64> = (0..b1)
        .map(|i| psi.psi2(e1[i + 1]) - psi.psi2(e1[i]))
        .collect();
    let e2 = f2.xi.edges();
    let p2: Vec<f64> = (0..b2)
        .map(|j| psi.psi2(-e2[j]) - psi.psi2(-e2[j + 1]))
        .collect();
    let mass: f64 = support.iter().map(|&s| w[s]).sum::<f64>() * vol;
    let mut lin1 = 0.0;
    let mut lin2 = 0.0;
    for x in 0..grid.len() {
        lin1 += c1[x * b1..(x + 1) * b1]
            .iter()
            .zip(&p1)
            .map(|(a, b)| a * b)
            .sum::<f64>();
        lin2 += c2[x * b2..(x + 1) * b2]
            .iter()
            .zip(&p2)
            .map(|(a, b)| a * b)
            .sum::<f64>();
    }
    let total_vol = vol * grid.len() as f64;
    Ok(-cross + mass * vol * (lin1 - lin2) + psi.psi2(0.0) * mass * total_vol)
}

/// Monte Carlo estimate of E∫(u₁(t) - u₂(t))^+ dx over coupled path pairs,
/// taking the snapshot of each path nearest to `t`.
pub fn contraction_functional(runs1: &[PathRun], runs2: &[PathRun], t: f64) -> Result<Accumulator> {
    if runs1.len() != runs2.len() {
        return Err(KinError::Incompatible(
            "ensembles have different sizes".into(),
        ));
    }
    let mut acc = Accumulator::default();
    for (a, b) in runs1.iter().zip(runs2) {
        let (sa, sb) = match (a.snapshot_at(t), b.snapshot_at(t)) {
            (Some(sa), Some(sb)) => (sa, sb),
            _ => return Err(KinError::Invalid("run without snapshots".into())),
        };
        acc.push(positive_part_l1(
            &sa.field.values,
            &sb.field.values,
            sa.field.grid.cell_volume(),
        ));
    }
    Ok(acc)
}

/// ∫(u₁ - u₂)^+ dx for tabulated fields.
pub fn positive_part_l1(u1: &[f64], u2: &[f64], cell_volume: f64) -> f64 {
    u1.iter()
        .zip(u2)
        .map(|(a, b)| (a - b).max(0.0))
        .sum::<f64>()
        * cell_volume
}

/// A computed remainder next to its theoretical majorant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub bound: f64,
}

impl Estimate {
    pub fn pass(&self) -> bool {
        self.value <= self.bound
    }
}

fn check_sequences(nu1: &[YoungMeasure], nu2: &[YoungMeasure], grid: &TorusGrid) -> Result<()> {
    if nu1.len() != nu2.len() {
        return Err(KinError::Incompatible(
            "Young measure sequences differ in length".into(),
        ));
    }
    for (a, b) in nu1.iter().zip(nu2) {
        check_spatial(a.fibers.len(), b.fibers.len(), grid)?;
    }
    Ok(())
}

/// I_ψ = ½ Σ_s dt Σ_{x,y} ρ_ε(x-y) dx^{2N} ∫∫ ψ_δ(ξ-ζ) Σ_k |g_k(x,ξ) - g_k(y,ζ)|²
/// dν¹_{x,s} dν²_{y,s}, left-point rule in time with t = dt·len.
/// Bound: (tD₁/2) ε²/δ, plus (tD₁C_ψ/2) h(δ) for multiplicative noise.
pub fn i_psi_estimate(
    nu1: &[YoungMeasure],
    nu2: &[YoungMeasure],
    dt: f64,
    grid: &TorusGrid,
    rho: &Mollifier,
    psi: &PsiPair,
    noise: &NoiseModel,
) -> Result<Estimate> {
    check_sequences(nu1, nu2, grid)?;
    let t = dt * nu1.len() as f64;
    let mut bound = 0.5 * t * noise.d1 * rho.epsilon * rho.epsilon / psi.delta;
    if !noise.is_additive() {
        bound += 0.5 * t * noise.d1 * C_PSI * noise.h(psi.delta);
    }
    if noise.is_zero() {
        return Ok(Estimate { value: 0.0, bound });
    }
    let w = rho.weights(grid);
    let support: Vec<usize> = (0..grid.len()).filter(|&s| w[s] != 0.0).collect();
    let profiles = noise.profiles_on(grid);
    let vol = grid.cell_volume();
    let mut value = 0.0;
    for (m1, m2) in nu1.iter().zip(nu2) {
        let mut frame = 0.0;
        for x in 0..grid.len() {
            for &s in &support {
                let y = grid.add(x, s);
                let mut pair = 0.0;
                for &(xi, wa) in &m1.fibers[x] {
                    let sx = noise.shape(xi);
                    for &(zeta, wb) in &m2.fibers[y] {
                        let k = psi.psi(xi - zeta);
                        if k == 0.0 {
                            continue;
                        }
                        let sy = noise.shape(zeta);
                        let g: f64 = profiles
                            .iter()
                            .map(|p| {
                                let d = p[x] * sx - p[y] * sy;
                                d * d
                            })
                            .sum();
                        pair += wa * wb * k * g;
                    }
                }
                frame += w[s] * pair;
            }
        }
        value += 0.5 * dt * frame * vol * vol;
    }
    Ok(Estimate { value, bound })
}

/// ∫∫ 1_{u₁>ξ} 1_{u₂≤ζ} (A'(ξ) - A'(ζ)) ψ_δ(ξ-ζ) dξ dζ in closed form after
/// the substitution r = ξ - ζ:
/// ∫ ψ_δ(r) [A(u₁) - A(u₂+r) - A(u₁-r) + A(u₂)] 1_{u₁-r>u₂} dr.
pub fn flux_pair_kernel(u1: f64, u2: f64, psi: &PsiPair, flux: &FluxModel) -> f64 {
    let d = psi.delta;
    let hi = d.min(u1 - u2);
    if hi <= -d {
        return 0.0;
    }
    let f = |r: f64| {
        psi.psi(r)
            * (flux.profile(u1) - flux.profile(u2 + r) - flux.profile(u1 - r) + flux.profile(u2))
    };
    if hi <= 0.0 {
        quadrature::gl_interval(&f, -d, hi)
    } else {
        quadrature::gl_interval(&f, -d, 0.0) + quadrature::gl_interval(&f, 0.0, hi)
    }
}

/// Υ(ξ,ζ) = ∫_ζ^∞ ∫_{-∞}^ξ Γ(ξ',ζ') |ξ'-ζ'| ψ_δ(ξ'-ζ') dξ' dζ', evaluated as
/// ∫ ψ_δ(r)|r| ∫_ζ^{ξ-r} Γ(ζ'+r, ζ') dζ' dr with the inner integral exact
/// and Gauss–Legendre on the polynomial pieces in r.
pub fn upsilon(xi: f64, zeta: f64, psi: &PsiPair, flux: &FluxModel) -> f64 {
    let d = psi.delta;
    let hi = d.min(xi - zeta);
    if hi <= -d {
        return 0.0;
    }
    let c = flux.growth_c;
    let inner = |r: f64| {
        let prim = |x: f64| flux.gamma_power_antiderivative(x);
        c * ((xi - r - zeta) + prim(xi) - prim(zeta + r) + prim(xi - r) - prim(zeta))
    };
    let f = |r: f64| psi.psi(r) * r.abs() * inner(r);
    let mut pts = vec![-d, hi];
    for b in [0.0, -zeta, xi] {
        if b > -d && b < hi {
            pts.push(b);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.windows(2)
        .map(|w| quadrature::gl_interval(&f, w[0], w[1]))
        .sum()
}

/// Constant C' of Υ(ξ,ζ) ≤ C'(1+|ξ|^p+|ζ|^p)δ. From ∫ψ_δ|r| = δ/3, the
/// ζ'-range length ≤ |ξ|+|ζ|+δ and Γ ≤ C(1 + 2(|ξ|+|ζ|+δ)^{p-1}) on it,
/// C' = C·3^{p-1}·max(1,δ)^p.
pub fn ffp_constant(flux: &FluxModel, delta: f64) -> f64 {
    let p = flux.growth_p as i32;
    flux.growth_c * 3f64.powi(p - 1) * delta.max(1.0).powi(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpsilonReport {
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn upsilon_check(xi: f64, zeta: f64, psi: &PsiPair, flux: &FluxModel) -> UpsilonReport {
    let p = flux.growth_p as i32;
    let value = upsilon(xi, zeta, psi, flux);
    let bound =
        ffp_constant(flux, psi.delta) * (1.0 + xi.abs().powi(p) + zeta.abs().powi(p)) * psi.delta;
    UpsilonReport {
        value,
        bound,
        pass: value <= bound,
    }
}

/// I_ρ = Σ_s dt Σ_{x,y} dx^{2N} (d·∇ρ_ε)(x-y) ∫∫ ν¹⊗ν² J(ξ,ζ) with J from
/// [`flux_pair_kernel`]; the value is reported in absolute terms. The bound
/// replaces J by C'(1+|ξ|^p+|ζ|^p)δ and d·∇ρ by |∇ρ|.
pub fn i_rho_estimate(
    nu1: &[YoungMeasure],
    nu2: &[YoungMeasure],
    dt: f64,
    grid: &TorusGrid,
    rho: &Mollifier,
    psi: &PsiPair,
    flux: &FluxModel,
) -> Result<Estimate> {
    check_sequences(nu1, nu2, grid)?;
    let gw = rho.gradient_weights(grid);
    let support: Vec<usize> = (0..grid.len()).filter(|&s| gw[s] != [0.0, 0.0]).collect();
    let vol = grid.cell_volume();
    let dir = flux.direction;
    let p = flux.growth_p as i32;
    let cp = ffp_constant(flux, psi.delta);
    let mut value = 0.0;
    let mut bound = 0.0;
    for (m1, m2) in nu1.iter().zip(nu2) {
        let mut v = 0.0;
        let mut b = 0.0;
        for x in 0..grid.len() {
            for &s in &support {
                let y = grid.add(x, s);
                let g = gw[s];
                let along = dir[0] * g[0] + dir[1] * g[1];
                let norm = (g[0] * g[0] + g[1] * g[1]).sqrt();
                let mut j = 0.0;
                let mut moment = 0.0;
                for &(a, wa) in &m1.fibers[x] {
                    for &(z, wb) in &m2.fibers[y] {
                        j += wa * wb * flux_pair_kernel(a, z, psi, flux);
                        moment += wa * wb * (1.0 + a.abs().powi(p) + z.abs().powi(p));
                    }
                }
                v += along * j;
                b += norm * moment;
            }
        }
        value += dt * v * vol * vol;
        bound += dt * b * vol * vol * cp * psi.delta;
    }
    Ok(Estimate {
        value: value.abs(),
        bound,
    })
}

/// Geometric ladder from `start` with `per_decade` points per decade, `len`
/// entries, decreasing when `start > 0` and `per_decade > 0`.
pub fn geometric_ladder(start: f64, per_decade: usize, len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| start * 10f64.powf(-(i as f64) / per_decade as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub delta: f64,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Evaluates `f` at every (ε, δ) pair, in parallel.
pub fn sweep<F>(epsilons: &[f64], deltas: &[f64], f: F) -> Result<Vec<SweepPoint>>
where
    F: Fn(f64, f64) -> Result<Estimate> + Sync,
{
    use rayon::prelude::*;
    let pairs: Vec<(f64, f64)> = epsilons
        .iter()
        .flat_map(|&e| deltas.iter().map(move |&d| (e, d)))
        .collect();
    pairs
        .par_iter()
        .map(|&(epsilon, delta)| {
            let est = f(epsilon, delta)?;
            Ok(SweepPoint {
                epsilon,
                delta,
                value: est.value,
                bound: est.bound,
                pass: est.pass(),
            })
        })
        .collect()
}

/// CSV with header epsilon,delta,value,bound,pass.
pub fn write_sweep_csv<W: std::io::Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridField;
    use crate::kinetic::{kinetic_function, XiGrid};

    #[test]
    fn psi_closed_forms() {
        let p = build_psi(0.4).unwrap();
        assert!((p.psi2(0.0) - 0.4 / 6.0).abs() < 1e-16);
        assert_eq!(p.psi1(10.0), 1.0);
        assert!((p.psi2(5.0) - 5.0).abs() < 1e-15);
        let r = p.check(400);
        assert!(r.pass, "{r:?}");
        let q = quadrature::integrate(|s| p.psi1(s), -0.4, 0.25, &[0.0], 1e-14);
        assert!((p.psi2(0.25) - q).abs() < 1e-14);
        assert!(build_psi(0.0).is_err());
    }

    #[test]
    fn cell_pair_matches_quadrature() {
        let p = build_psi(0.3).unwrap();
        let (a, b, h1, h2) = (0.1, -0.05, 0.2, 0.15);
        let q = quadrature::integrate(
            |xi| p.psi1(xi - b) - p.psi1(xi - b - h2),
            a,
            a + h1,
            &[b - 0.3, b, b + 0.3, b + h2 - 0.3, b + h2, b + h2 + 0.3],
            1e-15,
        );
        assert!((p.cell_pair(a, h1, b, h2) - q).abs() < 1e-14);
    }

    #[test]
    fn indicator_single_point() {
        let g = TorusGrid::new(1, 4).unwrap();
        let xi = XiGrid::with_spacing(-1.0, 2.0, 0.1).unwrap();
        let f = |u: f64| kinetic_function(&GridField::constant(g, u), &xi);
        let rho = Mollifier::triangular(0.5).unwrap();
        let p = build_psi(1.0).unwrap();
        let v = doubled_integral(&f(0.7), &f(0.2), &g, &rho, &p).unwrap();
        let e = xi.edges();
        let (j1, j2) = (
            e.iter().position(|x| (x - 0.7).abs() < 1e-9),
            e.iter().position(|x| (x - 0.2).abs() < 1e-9),
        );
        let exact = p.psi2(e[j1.unwrap()] - e[j2.unwrap()]);
        assert!((v - exact).abs() < 1e-12);
        assert!((exact - p.psi2(0.5)).abs() < 1e-12);
    }

    #[test]
    fn incompatible_xi_rejected() {
        let g = TorusGrid::new(1, 4).unwrap();
        let u = GridField::constant(g, 0.0);
        let a = kinetic_function(&u, &XiGrid::with_spacing(-1.0, 1.0, 0.1).unwrap());
        let b = kinetic_function(&u, &XiGrid::with_spacing(-1.0, 1.0, 0.2).unwrap());
        let rho = Mollifier::triangular(0.5).unwrap();
        assert!(doubled_integral(&a, &b, &g, &rho, &build_psi(0.1).unwrap()).is_err());
    }

    #[test]
    fn upsilon_vanishes_above_diagonal() {
        let p = build_psi(0.1).unwrap();
        let f = FluxModel::burgers(1);
        assert_eq!(upsilon(0.0, 0.1, &p, &f), 0.0);
        assert_eq!(upsilon(0.0, 0.5, &p, &f), 0.0);
        assert!(upsilon(0.0, 0.05, &p, &f) > 0.0);
    }

    #[test]
    fn flux_kernel_vanishes_for_linear_flux() {
        let p = build_psi(0.2).unwrap();
        let f = FluxModel::linear(2.0, 1);
        assert!(flux_pair_kernel(0.3, -0.4, &p, &f).abs() < 1e-15);
        let b = FluxModel::burgers(1);
        assert!(flux_pair_kernel(-1.0, 0.5, &p, &b) == 0.0);
    }

    #[test]
    fn ladder_spacing() {
        let l = geometric_ladder(1.0, 5, 6);
        assert!((l[5] - 0.1).abs() < 1e-15);
    }
}
