//! Invariants checked on random inputs.

use kinlab::doubling::{build_psi, doubled_integral, ffp_constant, upsilon};
use kinlab::flux::FluxModel;
use kinlab::grid::{GridField, Mollifier, TorusGrid};
use kinlab::harness::{path_seed, Accumulator};
use kinlab::kinetic::{kinetic_function, XiGrid};
use kinlab::noise::NoiseModel;
use kinlab::solver::{run_path, InitialData, SolverConfig, TrigTerm};
use proptest::prelude::*;

fn trig(mean: f64, c: f64, s: f64, k: i32) -> InitialData {
    InitialData::Trig {
        mean,
        terms: vec![TrigTerm {
            k: [k, 0],
            cos: c,
            sin: s,
        }],
    }
}

fn det_cfg(initial: InitialData, flux: FluxModel, eta: f64) -> SolverConfig {
    SolverConfig::new(
        TorusGrid::new(1, 32).unwrap(),
        flux,
        NoiseModel::zero(1),
        initial,
        eta,
        0.2,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_antiderivative_identities(delta in 0.01f64..3.0, r in -5.0f64..5.0) {
        let p = build_psi(delta).unwrap();
        prop_assert!((p.psi1(r) + p.psi1(-r) - 1.0).abs() < 1e-14);
        prop_assert!((p.psi2(r) - p.psi2(-r) - r).abs() < 1e-13);
        prop_assert!(p.psi2(r) >= r.max(0.0) - 1e-15);
        prop_assert!(p.psi2(r) <= r.max(0.0) + delta / 6.0 + 1e-15);
    }

    #[test]
    fn upsilon_below_majorant(
        xi in -2.0f64..2.0,
        zeta in -2.0f64..2.0,
        delta in 0.01f64..1.5,
        cubic in any::<bool>(),
    ) {
        let f = if cubic { FluxModel::cubic(1) } else { FluxModel::burgers(1) };
        let p = build_psi(delta).unwrap();
        let v = upsilon(xi, zeta, &p, &f);
        let q = f.growth_p as i32;
        let bound = ffp_constant(&f, delta) * (1.0 + xi.abs().powi(q) + zeta.abs().powi(q)) * delta;
        prop_assert!(v >= -1e-15);
        prop_assert!(v <= bound, "{} > {}", v, bound);
    }

    #[test]
    fn doubled_integral_of_constants(k1 in -8i64..8, k2 in -8i64..8, delta in 0.05f64..2.0) {
        let g = TorusGrid::new(1, 4).unwrap();
        let xi = XiGrid::with_spacing(-1.0, 1.0, 0.125).unwrap();
        let (u1, u2) = (k1 as f64 * 0.125, k2 as f64 * 0.125);
        let f = |u: f64| kinetic_function(&GridField::constant(g, u), &xi);
        let p = build_psi(delta).unwrap();
        let rho = Mollifier::triangular(0.4).unwrap();
        let v = doubled_integral(&f(u1), &f(u2), &g, &rho, &p).unwrap();
        prop_assert!((v - p.psi2(u1 - u2)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_scheme_is_conservative_and_bounded(
        mean in -0.5f64..0.5,
        c in -0.5f64..0.5,
        s in -0.5f64..0.5,
        k in 1i32..4,
        eta in 0.0f64..0.02,
    ) {
        let cfg = det_cfg(trig(mean, c, s, k), FluxModel::burgers(1), eta);
        let u0 = cfg.initial_field().unwrap();
        let run = run_path(&cfg, 0).unwrap();
        let u = run.final_field();
        prop_assert!((u.integral() - u0.integral()).abs() < 1e-13);
        prop_assert!(u.min() >= u0.min() - 1e-13 && u.max() <= u0.max() + 1e-13);
    }

    #[test]
    fn deterministic_l1_contraction(
        a in -0.4f64..0.4,
        b in -0.4f64..0.4,
        shift in -0.3f64..0.3,
    ) {
        let c1 = det_cfg(trig(0.1, a, b, 1), FluxModel::burgers(1), 0.01);
        let mut c2 = det_cfg(trig(0.1 + shift, b, a, 2), FluxModel::burgers(1), 0.01);
        c2.base_steps = Some(c1.base_step_count().unwrap().max(c2.base_step_count().unwrap()));
        let mut c1 = c1;
        c1.base_steps = c2.base_steps;
        let (r1, r2) = (run_path(&c1, 0).unwrap(), run_path(&c2, 0).unwrap());
        let vol = c1.grid.cell_volume();
        let pos = |x: &GridField, y: &GridField| -> f64 {
            x.values.iter().zip(&y.values).map(|(p, q)| (p - q).max(0.0)).sum::<f64>() * vol
        };
        let mut prev = f64::INFINITY;
        for (s1, s2) in r1.snapshots.iter().zip(&r2.snapshots) {
            let v = pos(&s1.field, &s2.field);
            prop_assert!(v <= prev + 1e-14);
            prev = v;
        }
    }

    #[test]
    fn accumulator_split_merge(values in prop::collection::vec(-10.0f64..10.0, 1..40), cut in 0usize..40) {
        let cut = cut.min(values.len());
        let fold = |v: &[f64]| {
            let mut a = Accumulator::default();
            v.iter().for_each(|x| a.push(*x));
            a
        };
        let whole = fold(&values);
        let merged = fold(&values[..cut]).merge(&fold(&values[cut..]));
        prop_assert_eq!(whole.count, merged.count);
        prop_assert!((whole.mean() - merged.mean()).abs() < 1e-12);
        prop_assert!((whole.variance() - merged.variance()).abs() < 1e-9);
    }

    #[test]
    fn path_seeds_distinct(master in any::<u64>(), i in 0u64..1000) {
        prop_assert_ne!(path_seed(master, i), path_seed(master, i + 1));
        prop_assert_eq!(path_seed(master, i), path_seed(master, i));
    }
}
