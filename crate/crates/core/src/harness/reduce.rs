//! Monte Carlo reduction through mergeable (count, sum, sum of squares)
//! triples.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Accumulator {
    pub fn single(v: f64) -> Self {
        Self {
            count: 1,
            sum: v,
            sum_sq: v * v,
        }
    }

    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&self, other: &Accumulator) -> Accumulator {
        Accumulator {
            count: self.count + other.count,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Merges partials left to right.
pub fn monte_carlo_reduce(partials: &[Accumulator]) -> Accumulator {
    partials
        .iter()
        .fold(Accumulator::default(), |a, b| a.merge(b))
}

/// Component-wise reduction of per-path vectors of statistics.
pub fn reduce_series(partials: &[Vec<Accumulator>]) -> Vec<Accumulator> {
    let len = partials.iter().map(|p| p.len()).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            monte_carlo_reduce(
                &partials
                    .iter()
                    .filter_map(|p| p.get(i).copied())
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_partial_is_identity() {
        let a = Accumulator {
            count: 3,
            sum: 1.5,
            sum_sq: 2.0,
        };
        assert_eq!(monte_carlo_reduce(&[a]), a);
    }

    #[test]
    fn merge_commutes() {
        let a = Accumulator {
            count: 3,
            sum: 1.5,
            sum_sq: 2.0,
        };
        let b = Accumulator {
            count: 5,
            sum: -0.25,
            sum_sq: 7.0,
        };
        let ab = a.merge(&b);
        let ba = b.merge(&a);
        assert!((ab.sum - ba.sum).abs() <= 1e-12 * ab.sum.abs());
        assert_eq!(ab.count, ba.count);
    }

    #[test]
    fn singletons_match_direct() {
        let xs: Vec<f64> = (0..64)
            .map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0)
            .collect();
        let acc = monte_carlo_reduce(
            &xs.iter()
                .map(|&x| Accumulator::single(x))
                .collect::<Vec<_>>(),
        );
        let mean = xs.iter().sum::<f64>() / 64.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 63.0;
        assert!((acc.mean() - mean).abs() < 1e-14);
        assert!((acc.variance() - var).abs() < 1e-12);
        assert!((acc.stderr() - (var / 64.0).sqrt()).abs() < 1e-12);
    }
}
