//! Bounded initial data catalog.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{KinError, Result};
use crate::grid::{GridField, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    /// Wave vector; the second entry is ignored in 1D.
    pub k: [i32; 2],
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Constant {
        c: f64,
    },
    /// mean + Σ cos·cos(2πk·x) + sin·sin(2πk·x)
    Trig {
        #[serde(default)]
        mean: f64,
        terms: Vec<TrigTerm>,
    },
    /// u_left on [0, split) and u_right on [split, 1) along x₁.
    Riemann {
        u_left: f64,
        u_right: f64,
        #[serde(default = "half")]
        split: f64,
    },
    /// mean + Σ_{k≤modes} (a_k cos + b_k sin)(2πk x₁) with a_k, b_k uniform
    /// in [-amplitude/k, amplitude/k], drawn from ChaCha20 keyed by `seed`.
    RandomFourier {
        modes: usize,
        amplitude: f64,
        seed: u64,
        #[serde(default)]
        mean: f64,
    },
}

fn half() -> f64 {
    0.5
}

impl InitialData {
    pub fn sine(mean: f64, amplitude: f64) -> Self {
        InitialData::Trig {
            mean,
            terms: vec![TrigTerm {
                k: [1, 0],
                cos: 0.0,
                sin: amplitude,
            }],
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let x1 = x[0];
        let x2 = x.get(1).copied().unwrap_or(0.0);
        match self {
            InitialData::Constant { c } => *c,
            InitialData::Trig { mean, terms } => {
                mean + terms
                    .iter()
                    .map(|t| {
                        let ph = 2.0
                            * PI
                            * (t.k[0] as f64 * x1
                                + if x.len() > 1 { t.k[1] as f64 * x2 } else { 0.0 });
                        t.cos * ph.cos() + t.sin * ph.sin()
                    })
                    .sum::<f64>()
            }
            InitialData::Riemann {
                u_left,
                u_right,
                split,
            } => {
                if x1 < *split {
                    *u_left
                } else {
                    *u_right
                }
            }
            InitialData::RandomFourier { .. } => {
                unreachable!("random data is tabulated in `field`")
            }
        }
    }

    pub fn field(&self, grid: TorusGrid) -> Result<GridField> {
        match self {
            InitialData::RandomFourier {
                modes,
                amplitude,
                seed,
                mean,
            } => {
                if !amplitude.is_finite() {
                    return Err(KinError::InvalidConfig("amplitude must be finite".into()));
                }
                let mut rng = ChaCha20Rng::seed_from_u64(*seed);
                let coef: Vec<(f64, f64)> = (1..=*modes)
                    .map(|k| {
                        let a = amplitude / k as f64;
                        (
                            rng.random_range(-1.0..=1.0) * a,
                            rng.random_range(-1.0..=1.0) * a,
                        )
                    })
                    .collect();
                GridField::from_fn(grid, |x| {
                    mean + coef
                        .iter()
                        .enumerate()
                        .map(|(i, (a, b))| {
                            let ph = 2.0 * PI * (i + 1) as f64 * x[0];
                            a * ph.cos() + b * ph.sin()
                        })
                        .sum::<f64>()
                })
            }
            InitialData::Riemann { split, .. } if !(0.0..=1.0).contains(split) => Err(
                KinError::InvalidConfig("Riemann split must lie in [0,1]".into()),
            ),
            _ => GridField::from_fn(grid, |x| self.eval(x)),
        }
    }
}
