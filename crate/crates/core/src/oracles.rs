//! Closed-form references: the Transport-Collapse relaxation
//! ∂_t f = 1_{u>ξ} - f, its kinetic measure, the erased-interval trajectory
//! with a time atom, and exact Burgers Riemann solutions on the line and on
//! the torus.

use serde::{Deserialize, Serialize};

use crate::error::{KinError, Result};
use crate::grid::{GridField, TorusGrid};
use crate::kinetic::{KineticFunction, KineticMeasure, XiGrid};

/// f₀(ξ) = Σ w_i 1_{a_i>ξ} with w_i > 0, Σ w_i = 1 and at most four terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavisideMix {
    pub atoms: Vec<(f64, f64)>,
}

impl HeavisideMix {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() > 4 {
            return Err(KinError::Invalid(format!(
                "need 1 to 4 Heavisides, got {}",
                atoms.len()
            )));
        }
        if atoms
            .iter()
            .any(|(a, w)| !a.is_finite() || !(*w > 0.0 && w.is_finite()))
        {
            return Err(KinError::Invalid(
                "Heaviside positions must be finite and weights positive".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(KinError::Invalid(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        Ok(Self { atoms })
    }

    pub fn indicator(u: f64) -> Self {
        Self {
            atoms: vec![(u, 1.0)],
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(a, _)| *a > xi)
            .map(|(_, w)| w)
            .sum()
    }

    /// u₀ = ∫ χ_{f₀} = Σ w_i a_i.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(a, w)| a * w).sum()
    }

    pub fn support(&self) -> (f64, f64) {
        self.atoms
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, _)| {
                (lo.min(*a), hi.max(*a))
            })
    }

    /// Average over each ξ-bin, so that ∫χ is exact on the grid.
    pub fn bin_averages(&self, xi: &XiGrid) -> Vec<f64> {
        let e = xi.edges();
        (0..xi.bins)
            .map(|j| {
                self.atoms
                    .iter()
                    .map(|(a, w)| w * ((a - e[j]) / xi.dxi).clamp(0.0, 1.0))
                    .sum()
            })
            .collect()
    }

    /// M₀(ξ) = ∫_{-∞}^ξ (1_{u₀>ζ} - f₀(ζ)) dζ = Σ w_i (min(ξ,u₀) - min(ξ,a_i)).
    pub fn collapse_potential(&self, xi: f64) -> f64 {
        let u0 = self.mean();
        self.atoms
            .iter()
            .map(|(a, w)| w * (xi.min(u0) - xi.min(*a)))
            .sum()
    }

    /// ∫_lo^hi M₀.
    fn collapse_potential_integral(&self, lo: f64, hi: f64) -> f64 {
        let g = |c: f64, x: f64| {
            if x <= c {
                0.5 * x * x
            } else {
                c * x - 0.5 * c * c
            }
        };
        let u0 = self.mean();
        self.atoms
            .iter()
            .map(|(a, w)| w * ((g(u0, hi) - g(u0, lo)) - (g(*a, hi) - g(*a, lo))))
            .sum()
    }
}

/// Catalog of initial fibers used by the tests and the CLI.
pub fn collapse_catalog() -> Vec<HeavisideMix> {
    vec![
        HeavisideMix::indicator(0.3),
        HeavisideMix {
            atoms: vec![(-0.5, 0.5), (0.5, 0.5)],
        },
        HeavisideMix {
            atoms: vec![(-0.8, 0.2), (0.1, 0.3), (0.6, 0.5)],
        },
        HeavisideMix {
            atoms: vec![(-0.9, 0.25), (-0.3, 0.25), (0.2, 0.25), (0.9, 0.25)],
        },
        HeavisideMix {
            atoms: vec![(-0.2, 0.9), (0.8, 0.1)],
        },
    ]
}

fn collapse_values(f0: &HeavisideMix, t: f64, xi: &XiGrid) -> Vec<f64> {
    let e = (-t).exp();
    let ind = HeavisideMix::indicator(f0.mean()).bin_averages(xi);
    f0.bin_averages(xi)
        .into_iter()
        .zip(ind)
        .map(|(a, b)| e * a + (1.0 - e) * b)
        .collect()
}

fn check_covers(f0: &HeavisideMix, xi: &XiGrid) -> Result<()> {
    let (lo, hi) = f0.support();
    if lo < xi.xi_min() || hi > xi.xi_max() {
        return Err(KinError::Invalid(format!(
            "xi grid [{}, {}] does not cover [{lo}, {hi}]",
            xi.xi_min(),
            xi.xi_max()
        )));
    }
    Ok(())
}

/// f(t) = e^{-t} f₀ + (1 - e^{-t}) 1_{u₀>ξ}, bin-averaged on `xi`.
pub fn collapse_exact(f0: &HeavisideMix, t: f64, xi: &XiGrid) -> Result<KineticFunction> {
    check_covers(f0, xi)?;
    KineticFunction::new(*xi, 1, collapse_values(f0, t, xi))
}

/// u = ∫χ_f for a single fiber: ξ_min + Σ f_j Δξ.
fn fiber_mean(values: &[f64], xi: &XiGrid) -> f64 {
    xi.xi_min() + values.iter().sum::<f64>() * xi.dxi
}

/// Explicit Euler for the bin-averaged system, recomputing u = ∫χ_f each
/// step. The last step is shortened to land on `t`.
pub fn collapse_numeric(
    f0: &HeavisideMix,
    t: f64,
    dt: f64,
    xi: &XiGrid,
) -> Result<KineticFunction> {
    check_covers(f0, xi)?;
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(KinError::Invalid("need dt > 0 and t ≥ 0".into()));
    }
    let mut f = f0.bin_averages(xi);
    let steps = (t / dt - 1e-9).ceil().max(0.0) as usize;
    let mut now = 0.0;
    for _ in 0..steps {
        let h = dt.min(t - now);
        let u = fiber_mean(&f, xi);
        let ind = HeavisideMix::indicator(u).bin_averages(xi);
        for (v, i) in f.iter_mut().zip(ind) {
            *v += h * (i - *v);
        }
        now += h;
    }
    KineticFunction::new(*xi, 1, f)
}

/// ‖f_numeric(t) - f_exact(t)‖_{L¹(ξ)} for every step size.
pub fn collapse_errors(
    f0: &HeavisideMix,
    t: f64,
    dts: &[f64],
    xi: &XiGrid,
) -> Result<Vec<(f64, f64)>> {
    let exact = collapse_exact(f0, t, xi)?;
    dts.iter()
        .map(|&dt| {
            let num = collapse_numeric(f0, t, dt, xi)?;
            let err = num
                .values
                .iter()
                .zip(&exact.values)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                * xi.dxi;
            Ok((dt, err))
        })
        .collect()
}

/// m(t, ξ) = ∫_{-∞}^ξ (1_{u₀>ζ} - f(t,ζ)) dζ = e^{-t} M₀(ξ).
pub fn collapse_measure(f0: &HeavisideMix, t: f64, xi: f64) -> f64 {
    (-t).exp() * f0.collapse_potential(xi)
}

/// The trajectory with [t₁, t₂] removed and its measure n binned in
/// (t, ξ), plus snapshots at every t-bin edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasedInterval {
    pub t1: f64,
    pub t2: f64,
    pub measure: KineticMeasure,
    /// ∫_{ξ-bin} ∫_{-∞}^ξ (f(t₂) - f(t₁)), the atom of n at t₁.
    pub atom_profile: Vec<f64>,
    pub snapshots: Vec<(f64, KineticFunction)>,
}

fn erased_time(t: f64, t1: f64, t2: f64) -> f64 {
    if t <= t1 {
        t
    } else {
        t + t2 - t1
    }
}

/// ∫_a^b e^{-τ(t)} dt for the erased clock τ.
fn erased_decay_integral(a: f64, b: f64, t1: f64, t2: f64) -> f64 {
    let piece = |lo: f64, hi: f64, shift: f64| {
        if hi <= lo {
            0.0
        } else {
            (-(lo + shift)).exp() - (-(hi + shift)).exp()
        }
    };
    piece(a, b.min(t1), 0.0) + piece(a.max(t1), b, t2 - t1)
}

/// ĝ(t) = f(t) on [0,t₁] and f(t + t₂ - t₁) after, whose measure
/// n = m̂ + δ(t - t₁) ∫_{-∞}^ξ (f(t₂) - f(t₁)) carries an atom of density
/// (e^{-t₁} - e^{-t₂}) M₀(ξ) at t₁.
pub fn erased_interval_example(
    f0: &HeavisideMix,
    t1: f64,
    t2: f64,
    t_end: f64,
    t_bins: usize,
    xi: &XiGrid,
) -> Result<ErasedInterval> {
    check_covers(f0, xi)?;
    if !(0.0 <= t1 && t1 <= t2 && t1 < t_end) {
        return Err(KinError::Invalid("need 0 ≤ t1 ≤ t2 and t1 < t_end".into()));
    }
    let mut m = KineticMeasure::new(1, t_bins, t_end, *xi)?;
    let e = xi.edges();
    let m0: Vec<f64> = (0..xi.bins)
        .map(|j| f0.collapse_potential_integral(e[j], e[j + 1]).max(0.0))
        .collect();
    let w = m.t_bin_width();
    for b in 0..t_bins {
        let decay = erased_decay_integral(b as f64 * w, (b + 1) as f64 * w, t1, t2);
        let profile: Vec<f64> = m0.iter().map(|v| v * decay).collect();
        m.deposit_profile(0, b, &profile)?;
    }
    let jump = (-t1).exp() - (-t2).exp();
    let atom_profile: Vec<f64> = m0.iter().map(|v| v * jump).collect();
    m.deposit_profile(0, m.t_bin_of(t1), &atom_profile)?;
    let snapshots = (0..=t_bins)
        .map(|b| {
            let t = b as f64 * w;
            let f = KineticFunction::new(*xi, 1, collapse_values(f0, erased_time(t, t1, t2), xi))?;
            Ok((t, f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErasedInterval {
        t1,
        t2,
        measure: m,
        atom_profile,
        snapshots,
    })
}

/// Entropy solution of Burgers u_t + (u²/2)_x = 0 on the line with
/// u(x,0) = u_L for x < 0 and u_R for x > 0.
pub fn burgers_riemann(u_left: f64, u_right: f64, x: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return if x < 0.0 { u_left } else { u_right };
    }
    if u_left > u_right {
        let s = 0.5 * (u_left + u_right);
        if x < s * t {
            u_left
        } else {
            u_right
        }
    } else {
        (x / t).clamp(u_left, u_right)
    }
}

/// Interval [lo, hi] (relative to the jump) occupied by the Riemann wave.
fn wave_span(u_left: f64, u_right: f64, t: f64) -> (f64, f64) {
    if u_left > u_right {
        let s = 0.5 * (u_left + u_right) * t;
        (s, s)
    } else {
        (u_left * t, u_right * t)
    }
}

/// Burgers on the unit torus from u_L on [0, split) and u_R on [split, 1):
/// the two Riemann problems at `split` and at 0, valid until their waves
/// meet. Returns the solution at the grid points (first axis).
pub fn burgers_riemann_periodic(
    u_left: f64,
    u_right: f64,
    split: f64,
    t: f64,
    grid: TorusGrid,
) -> Result<GridField> {
    let (a1, b1) = wave_span(u_left, u_right, t);
    let (a0, b0) = wave_span(u_right, u_left, t);
    // Wave at split occupies [split+a1, split+b1]; wave at 0 occupies
    // [a0, b0] mod 1. They must stay disjoint and ordered.
    if !(b0 < split + a1 && split + b1 < 1.0 + a0) {
        return Err(KinError::Invalid(format!(
            "Riemann waves interact before t = {t}"
        )));
    }
    let within = |off: f64, lo: f64, hi: f64| {
        [off, off - 1.0, off + 1.0]
            .into_iter()
            .find(|o| *o >= lo && *o <= hi)
    };
    GridField::from_fn(grid, |x| {
        let x = x[0];
        if let Some(o) = within(x, a0, b0) {
            return burgers_riemann(u_right, u_left, o, t);
        }
        if let Some(o) = within(x - split, a1, b1) {
            return burgers_riemann(u_left, u_right, o, t);
        }
        // The state is the one to the right of the nearest wave on the left.
        let d0 = (x - b0).rem_euclid(1.0);
        let d1 = (x - split - b1).rem_euclid(1.0);
        if d0 < d1 {
            u_left
        } else {
            u_right
        }
    })
}
