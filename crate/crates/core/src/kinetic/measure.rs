//! Histogram of the kinetic measure over (x-cell, t-bin, ξ-bin).

use serde::{Deserialize, Serialize};

use super::XiGrid;
use crate::error::{KinError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticMeasure {
    pub n_cells: usize,
    pub t_bins: usize,
    pub t_end: f64,
    pub xi: XiGrid,
    /// Row-major `[t_bin][cell][xi_bin]`.
    weights: Vec<f64>,
    /// Running sum of deposited mass, in deposition order.
    pub total_mass: f64,
    /// Number of times the ξ-grid had to be widened.
    pub widenings: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureTail {
    /// Mass of bins with |ξ_center| ≥ R.
    pub mass: f64,
    /// Σ |ξ_center|^p w over those bins.
    pub moment: f64,
}

impl KineticMeasure {
    pub fn new(n_cells: usize, t_bins: usize, t_end: f64, xi: XiGrid) -> Result<Self> {
        if n_cells == 0 || t_bins == 0 || !(t_end > 0.0) {
            return Err(KinError::Invalid(
                "kinetic measure needs cells, t-bins and t_end > 0".into(),
            ));
        }
        Ok(Self {
            n_cells,
            t_bins,
            t_end,
            xi,
            weights: vec![0.0; n_cells * t_bins * xi.bins],
            total_mass: 0.0,
            widenings: 0,
        })
    }

    fn idx(&self, t: usize, cell: usize, j: usize) -> usize {
        (t * self.n_cells + cell) * self.xi.bins + j
    }

    pub fn t_bin_of(&self, t: f64) -> usize {
        (((t / self.t_end) * self.t_bins as f64).floor().max(0.0) as usize).min(self.t_bins - 1)
    }

    pub fn t_bin_width(&self) -> f64 {
        self.t_end / self.t_bins as f64
    }

    pub fn t_bin_center(&self, b: usize) -> f64 {
        (b as f64 + 0.5) * self.t_bin_width()
    }

    pub fn weight(&self, t: usize, cell: usize, j: usize) -> f64 {
        self.weights[self.idx(t, cell, j)]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn widen(&mut self, xi_value: f64) {
        let new = self.xi.widened_to(xi_value);
        let shift = (self.xi.lo_index - new.lo_index) as usize;
        let mut w = vec![0.0; self.n_cells * self.t_bins * new.bins];
        for t in 0..self.t_bins {
            for c in 0..self.n_cells {
                for j in 0..self.xi.bins {
                    w[(t * self.n_cells + c) * new.bins + j + shift] =
                        self.weights[self.idx(t, c, j)];
                }
            }
        }
        log::debug!(
            "kinetic measure: xi = {xi_value} outside [{}, {}); widening",
            self.xi.xi_min(),
            self.xi.xi_max()
        );
        self.xi = new;
        self.weights = w;
        self.widenings += 1;
    }

    /// Adds `w ≥ 0` at (cell, time t, ξ), widening the ξ-grid if needed.
    pub fn deposit(&mut self, cell: usize, t: f64, xi_value: f64, w: f64) {
        debug_assert!(w >= 0.0);
        let j = match self.xi.bin_of(xi_value) {
            Some(j) => j,
            None => {
                self.widen(xi_value);
                self.xi.bin_of(xi_value).expect("widened grid covers value")
            }
        };
        let tb = self.t_bin_of(t);
        let i = self.idx(tb, cell, j);
        self.weights[i] += w;
        self.total_mass += w;
    }

    /// Deposits a whole ξ-profile (already integrated per bin) into one cell
    /// and t-bin; bins must match.
    pub fn deposit_profile(&mut self, cell: usize, t_bin: usize, profile: &[f64]) -> Result<()> {
        if profile.len() != self.xi.bins {
            return Err(KinError::Incompatible(
                "profile length differs from xi bins".into(),
            ));
        }
        for (j, &w) in profile.iter().enumerate() {
            if w < 0.0 {
                return Err(KinError::Invalid(format!("negative measure weight {w}")));
            }
            let i = self.idx(t_bin, cell, j);
            self.weights[i] += w;
            self.total_mass += w;
        }
        Ok(())
    }

    pub fn sum_weights(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Mass per t-bin.
    pub fn t_marginal(&self) -> Vec<f64> {
        let per = self.n_cells * self.xi.bins;
        self.weights.chunks(per).map(|c| c.iter().sum()).collect()
    }

    /// Mass per ξ-bin.
    pub fn xi_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.xi.bins];
        for row in self.weights.chunks(self.xi.bins) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w;
            }
        }
        out
    }

    /// Mass per ξ-bin inside t-bin `b`.
    pub fn xi_profile_at(&self, b: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.xi.bins];
        for c in 0..self.n_cells {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.weight(b, c, j);
            }
        }
        out
    }

    /// Mass with |ξ| ≥ R and the corresponding p-moment.
    pub fn tail(&self, r: f64, p: f64) -> MeasureTail {
        let centers = self.xi.centers();
        let marg = self.xi_marginal();
        let mut mass = 0.0;
        let mut moment = 0.0;
        for (c, w) in centers.iter().zip(&marg) {
            if c.abs() >= r {
                mass += w;
                moment += c.abs().powf(p) * w;
            }
        }
        MeasureTail { mass, moment }
    }

    /// Associative merge of two histograms with identical geometry; the
    /// coarser ξ-range is widened to the union first.
    pub fn merge(&mut self, other: &KineticMeasure) -> Result<()> {
        if self.n_cells != other.n_cells
            || self.t_bins != other.t_bins
            || self.xi.dxi != other.xi.dxi
        {
            return Err(KinError::Incompatible(
                "kinetic measures differ in geometry".into(),
            ));
        }
        if other.xi.xi_min() < self.xi.xi_min() {
            self.widen(other.xi.center(0));
        }
        if other.xi.xi_max() > self.xi.xi_max() {
            self.widen(other.xi.center(other.xi.bins - 1));
        }
        let shift = (other.xi.lo_index - self.xi.lo_index) as usize;
        for t in 0..self.t_bins {
            for c in 0..self.n_cells {
                for j in 0..other.xi.bins {
                    let i = self.idx(t, c, j + shift);
                    self.weights[i] += other.weight(t, c, j);
                }
            }
        }
        self.total_mass += other.total_mass;
        Ok(())
    }

    /// CSV rows (x_cell, t_bin, xi_bin, weight) for nonzero weights; `xi_bin`
    /// counts from the lowest bin of the grid.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x_cell", "t_bin", "xi_bin", "weight"])?;
        for t in 0..self.t_bins {
            for c in 0..self.n_cells {
                for j in 0..self.xi.bins {
                    let v = self.weight(t, c, j);
                    if v != 0.0 {
                        w.serialize((c, t, j, v))?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi() -> XiGrid {
        XiGrid::with_spacing(-1.0, 1.0, 0.25).unwrap()
    }

    #[test]
    fn deposit_and_tail() {
        let mut m = KineticMeasure::new(4, 5, 1.0, xi()).unwrap();
        m.deposit(0, 0.1, 0.3, 1.0);
        m.deposit(2, 0.95, -0.6, 2.0);
        assert_eq!(m.total_mass, 3.0);
        assert_eq!(m.sum_weights(), 3.0);
        assert_eq!(m.tail(0.0, 2.0).mass, 3.0);
        assert_eq!(m.tail(100.0, 2.0).mass, 0.0);
        assert_eq!(m.tail(0.5, 0.0).mass, 2.0);
        assert_eq!(m.t_marginal(), vec![1.0, 0.0, 0.0, 0.0, 2.0]);
        // tail mass is nonincreasing in R
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let t = m.tail(0.1 * k as f64, 0.0).mass;
            assert!(t <= prev);
            prev = t;
        }
    }

    #[test]
    fn widening_preserves_mass() {
        let mut m = KineticMeasure::new(2, 2, 1.0, xi()).unwrap();
        m.deposit(0, 0.0, 0.1, 1.0);
        let before = m.xi_marginal();
        m.deposit(1, 0.7, 7.3, 0.5);
        assert_eq!(m.widenings, 1);
        assert_eq!(m.sum_weights(), 1.5);
        let after = m.xi_marginal();
        let j = m.xi.bin_of(0.1).unwrap();
        assert_eq!(after[j], before[xi().bin_of(0.1).unwrap()]);
        assert!(m.xi.bin_of(7.3).is_some());
    }

    #[test]
    fn merge_is_additive() {
        let mut a = KineticMeasure::new(2, 2, 1.0, xi()).unwrap();
        let mut b = KineticMeasure::new(2, 2, 1.0, xi()).unwrap();
        a.deposit(0, 0.2, 0.1, 1.0);
        b.deposit(1, 0.8, 3.0, 2.0);
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        assert_eq!(ab.sum_weights(), 3.0);
        let keyed = |m: &KineticMeasure| {
            m.xi_marginal()
                .into_iter()
                .enumerate()
                .filter(|(_, w)| *w != 0.0)
                .map(|(j, w)| (m.xi.lo_index + j as i64, w))
                .collect::<Vec<_>>()
        };
        assert_eq!(keyed(&ab), keyed(&ba));
    }

    #[test]
    fn csv_schema() {
        let mut m = KineticMeasure::new(2, 2, 1.0, xi()).unwrap();
        m.deposit(1, 0.6, 0.1, 0.5);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("x_cell,t_bin,xi_bin,weight"));
        assert_eq!(lines.count(), 1);
    }
}
