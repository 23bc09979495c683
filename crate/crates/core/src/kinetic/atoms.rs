//! Detection of time atoms of a kinetic measure and the jump identity
//! ⟨f⁺ - f⁻, φ⟩ = -m({t*})(∂_ξφ).

use serde::{Deserialize, Serialize};

use super::{KineticFunction, KineticMeasure, SeparableTest};
use crate::error::{KinError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAtom {
    pub t_bin: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub mass: f64,
    /// Largest |⟨f(t_end) - f(t_start), φ⟩ + m_bin(∂_ξφ)| over the tests, when
    /// snapshots bracket the bin.
    pub defect: Option<f64>,
    /// ⟨f(t_end) - f(t_start), φ⟩ for the first test.
    pub jump: Option<f64>,
}

/// 5 × the median per-t-bin mass.
pub fn atom_threshold(t_marginal: &[f64]) -> f64 {
    if t_marginal.is_empty() {
        return 0.0;
    }
    let mut v = t_marginal.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    5.0 * median
}

fn pairing(f: &KineticFunction, test: &SeparableTest, cell_volume: f64) -> f64 {
    let gc: Vec<f64> = f.xi.centers().iter().map(|&c| test.gamma.eval(c)).collect();
    (0..f.n_points)
        .map(|i| test.alpha[i] * f.fiber(i).iter().zip(&gc).map(|(a, b)| a * b).sum::<f64>())
        .sum::<f64>()
        * f.xi.dxi
        * cell_volume
}

/// Flags t-bins whose mass exceeds [`atom_threshold`] and checks the jump
/// identity against the snapshots bracketing each flagged bin. Snapshots
/// must be sorted by time and share the measure's ξ-grid.
pub fn detect_time_atoms(
    m: &KineticMeasure,
    snapshots: &[(f64, KineticFunction)],
    tests: &[SeparableTest],
    cell_volume: f64,
) -> Result<Vec<TimeAtom>> {
    let marg = m.t_marginal();
    let thr = atom_threshold(&marg);
    let w = m.t_bin_width();
    let tol = 1e-9 * w;
    let mut out = Vec::new();
    for (b, &mass) in marg.iter().enumerate() {
        if mass <= thr || mass == 0.0 {
            continue;
        }
        let t0 = b as f64 * w;
        let t1 = t0 + w;
        let before = snapshots.iter().rev().find(|(t, _)| *t <= t0 + tol);
        let after = snapshots.iter().find(|(t, _)| *t >= t1 - tol);
        let (mut defect, mut jump) = (None, None);
        if let (Some((_, fm)), Some((_, fp))) = (before, after) {
            if !fm.xi.same_bins(&m.xi) || !fp.xi.same_bins(&m.xi) {
                return Err(KinError::Incompatible(
                    "snapshot xi grid differs from the measure's".into(),
                ));
            }
            let mut worst = 0.0f64;
            for (k, t) in tests.iter().enumerate() {
                let lhs = pairing(fp, t, cell_volume) - pairing(fm, t, cell_volume);
                let centers = m.xi.centers();
                let mut rhs = 0.0;
                for c in 0..m.n_cells {
                    for (j, xc) in centers.iter().enumerate() {
                        rhs -= m.weight(b, c, j) * t.alpha[c] * t.gamma.derivative(*xc);
                    }
                }
                if k == 0 {
                    jump = Some(lhs);
                }
                worst = worst.max((lhs - rhs).abs());
            }
            defect = Some(worst);
        }
        out.push(TimeAtom {
            t_bin: b,
            t_start: t0,
            t_end: t1,
            mass,
            defect,
            jump,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::XiGrid;

    #[test]
    fn threshold_is_five_medians() {
        assert_eq!(atom_threshold(&[1.0, 2.0, 3.0]), 10.0);
        assert_eq!(atom_threshold(&[1.0, 2.0, 3.0, 4.0]), 12.5);
        assert_eq!(atom_threshold(&[]), 0.0);
    }

    #[test]
    fn empty_measure_has_no_atoms() {
        let xi = XiGrid::with_spacing(-1.0, 1.0, 0.1).unwrap();
        let m = KineticMeasure::new(1, 10, 1.0, xi).unwrap();
        assert!(detect_time_atoms(&m, &[], &[], 1.0).unwrap().is_empty());
    }

    #[test]
    fn uniform_mass_has_no_atoms() {
        let xi = XiGrid::with_spacing(-1.0, 1.0, 0.1).unwrap();
        let mut m = KineticMeasure::new(1, 10, 1.0, xi).unwrap();
        for b in 0..10 {
            m.deposit(0, (b as f64 + 0.5) / 10.0, 0.05, 1.0 + 0.1 * b as f64);
        }
        assert!(detect_time_atoms(&m, &[], &[], 1.0).unwrap().is_empty());
    }
}
