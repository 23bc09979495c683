//! Closed-form oracles and the Υ kernel against independent computations.

use kinlab::doubling::{build_psi, upsilon};
use kinlab::flux::FluxModel;
use kinlab::grid::TorusGrid;
use kinlab::kinetic::XiGrid;
use kinlab::oracles::{
    burgers_riemann, burgers_riemann_periodic, collapse_catalog, collapse_exact, collapse_measure,
    collapse_numeric,
};
use kinlab::quadrature::gl_interval;

fn pieces(f: &dyn Fn(f64) -> f64, mut pts: Vec<f64>) -> f64 {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.windows(2).map(|w| gl_interval(&f, w[0], w[1])).sum()
}

/// Υ from its definition ∫_ζ^∞ ∫_{-∞}^ξ Γ(ξ',ζ')|ξ'-ζ'|ψ_δ(ξ'-ζ') dξ' dζ'
/// by nested piecewise quadrature.
fn upsilon_brute(xi: f64, zeta: f64, delta: f64, flux: &FluxModel) -> f64 {
    let psi = build_psi(delta).unwrap();
    let inner = |z: f64| -> f64 {
        let lo = z - delta;
        let hi = xi.min(z + delta);
        if hi <= lo {
            return 0.0;
        }
        let g = |x: f64| flux.gamma(x, z) * (x - z).abs() * psi.psi(x - z);
        let mut pts = vec![lo, hi];
        for b in [z, 0.0] {
            if b > lo && b < hi {
                pts.push(b);
            }
        }
        pieces(&g, pts)
    };
    let top = xi + delta;
    if top <= zeta {
        return 0.0;
    }
    let mut pts = vec![zeta, top];
    for b in [xi, xi - delta, 0.0] {
        if b > zeta && b < top {
            pts.push(b);
        }
    }
    // refine to keep the nested rule accurate across |ξ'|^{p-1} kinks
    let mut fine = vec![];
    for w in {
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.clone()
    }
    .windows(2)
    {
        for k in 0..16 {
            fine.push(w[0] + (w[1] - w[0]) * k as f64 / 16.0);
        }
    }
    fine.push(top);
    pieces(&inner, fine)
}

#[test]
fn upsilon_matches_definition() {
    for flux in [FluxModel::burgers(1), FluxModel::cubic(1)] {
        for (xi, zeta, delta) in [
            (0.5, 0.2, 0.3),
            (-0.4, -0.6, 0.5),
            (1.2, -0.9, 0.1),
            (0.05, 0.1, 0.2),
            (0.3, -0.2, 1.0),
        ] {
            let a = upsilon(xi, zeta, &build_psi(delta).unwrap(), &flux);
            let b = upsilon_brute(xi, zeta, delta, &flux);
            assert!(
                (a - b).abs() <= 1e-9 * b.abs().max(1e-3),
                "({xi},{zeta},{delta}): {a} vs {b}"
            );
        }
    }
}

#[test]
fn collapse_exact_solves_the_ode() {
    let xi = XiGrid::with_spacing(-1.5, 1.5, 0.05).unwrap();
    for f0 in collapse_catalog() {
        let exact = collapse_exact(&f0, 0.7, &xi).unwrap();
        let fine = collapse_numeric(&f0, 0.7, 1e-4, &xi).unwrap();
        let gap = exact
            .values
            .iter()
            .zip(&fine.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-4, "{gap}");
    }
}

#[test]
fn collapse_measure_decays_exponentially() {
    let f0 = &collapse_catalog()[3];
    for z in [-0.5, 0.0, 0.4] {
        let m0 = collapse_measure(f0, 0.0, z);
        assert!(m0 > 0.0);
        let m1 = collapse_measure(f0, 1.3, z);
        assert!((m1 - (-1.3f64).exp() * m0).abs() < 1e-15);
    }
}

#[test]
fn riemann_shock_and_rarefaction() {
    // shock with the Rankine-Hugoniot speed (uL + uR)/2
    assert_eq!(burgers_riemann(2.0, 0.0, 0.99, 1.0), 2.0);
    assert_eq!(burgers_riemann(2.0, 0.0, 1.01, 1.0), 0.0);
    // rarefaction fan u = x/t
    assert!((burgers_riemann(-1.0, 1.0, 0.3, 2.0) - 0.15).abs() < 1e-15);
}

#[test]
fn periodic_riemann_conserves_mass() {
    let g = TorusGrid::new(1, 1000).unwrap();
    let m0 = burgers_riemann_periodic(1.0, 0.0, 0.5, 0.0, g)
        .unwrap()
        .integral();
    for t in [0.2, 0.5, 0.9] {
        let m = burgers_riemann_periodic(1.0, 0.0, 0.5, t, g)
            .unwrap()
            .integral();
        assert!((m - m0).abs() < 2e-3, "t={t}: {m} vs {m0}");
    }
}
