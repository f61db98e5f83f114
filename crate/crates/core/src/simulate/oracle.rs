//! Exact law of the final state for small populations.
//!
//! Probability mass is pushed forward through the jump chain. Every
//! transition lowers `X`, or keeps `X` and `U` and lowers `Y`, so visiting
//! states by decreasing `X` and then decreasing `Y` handles each state after
//! all of its predecessors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{jump_weights, ModelParams, PopulationState};

/// Default population limit; the state space grows like `n^3`.
pub const DEFAULT_ORACLE_MAX_N: u64 = 60;

/// Law of the final `(X, U)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalDistribution {
    pub n: u64,
    /// `probs[x * (n + 1) + u]` is `P(X_final = x, U_final = u)`.
    probs: Vec<f64>,
}

impl FinalDistribution {
    pub fn prob(&self, x: u64, u: u64) -> f64 {
        if x > self.n || u > self.n {
            return 0.0;
        }
        self.probs[(x * (self.n + 1) + u) as usize]
    }

    /// Non-zero cells as `((x, u), p)`, ordered by `(x, u)`.
    pub fn support(&self) -> Vec<((u64, u64), f64)> {
        let w = self.n + 1;
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| ((i as u64 / w, i as u64 % w), p))
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `P(X_final = x)` for `x = 0..=n`.
    pub fn marginal_x(&self) -> Vec<f64> {
        self.probs.chunks(self.n as usize + 1).map(|row| row.iter().sum()).collect()
    }

    /// `E[X_final / N]`.
    pub fn mean_x_fraction(&self) -> f64 {
        let n = self.n as f64;
        self.marginal_x().iter().enumerate().map(|(x, p)| p * x as f64 / n).sum()
    }

    /// `E[U_final / N]`.
    pub fn mean_u_fraction(&self) -> f64 {
        let n = self.n as f64;
        self.support().iter().map(|&((_, u), p)| p * u as f64 / n).sum()
    }
}

pub fn exact_final_distribution(n: u64, p: &ModelParams) -> Result<FinalDistribution> {
    exact_final_distribution_with_limit(n, p, DEFAULT_ORACLE_MAX_N)
}

pub fn exact_final_distribution_with_limit(n: u64, p: &ModelParams, n_max: u64) -> Result<FinalDistribution> {
    if n > n_max {
        return Err(Error::TooLarge { n, max: n_max });
    }
    if n < 1 {
        return Err(Error::InvalidArgument("population parameter n must be >= 1".into()));
    }
    let side = (n + 2) as usize;
    let idx = |x: u64, u: u64, y: u64| (x as usize * side + u as usize) * side + y as usize;
    let mut mass = vec![0.0f64; (n as usize + 1) * side * side];
    let mut probs = vec![0.0f64; ((n + 1) * (n + 1)) as usize];
    mass[idx(n, 0, 1)] = 1.0;

    for x in (0..=n).rev() {
        for y in (1..=(n + 1 - x)).rev() {
            for u in 0..=(n + 1 - x - y) {
                let m = mass[idx(x, u, y)];
                if m == 0.0 {
                    continue;
                }
                let s = PopulationState { x, u, y, z: n + 1 - x - u - y, n };
                let w = jump_weights(&s, p);
                let total = w.total();
                if w.r0 > 0.0 {
                    mass[idx(x - 1, u, y + 1)] += m * (w.r0 / total);
                }
                if w.r1 > 0.0 {
                    mass[idx(x - 1, u + 1, y)] += m * (w.r1 / total);
                }
                if w.r2 > 0.0 {
                    mass[idx(x, u, y - 2)] += m * (w.r2 / total);
                }
                if w.r3 > 0.0 {
                    mass[idx(x, u, y - 1)] += m * (w.r3 / total);
                }
            }
        }
        // y = 0 slots of this x are final now
        for u in 0..=(n + 1 - x) {
            let m = mass[idx(x, u, 0)];
            if m > 0.0 {
                probs[(x * (n + 1) + u) as usize] += m;
            }
        }
    }
    Ok(FinalDistribution { n, probs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Preset;

    #[test]
    fn dk_with_one_ignorant() {
        let d = exact_final_distribution(1, &Preset::Dk.params().unwrap()).unwrap();
        assert_eq!(d.prob(0, 0), 1.0);
        assert_eq!(d.support().len(), 1);
    }

    #[test]
    fn mt_never_ends_untouched() {
        let d = exact_final_distribution(2, &Preset::Mt.params().unwrap()).unwrap();
        let mx = d.marginal_x();
        assert_eq!(mx[2], 0.0);
        assert!((mx.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // from (2,0,1): spread to (1,0,2); then spread (w=2) or stifle (w=2)
        // -> (0,0,3) absorbs with x=0; (1,0,1) -> spread (w=1) or stifle (w=1)
        assert!((mx[1] - 0.25).abs() < 1e-15, "{mx:?}");
        assert!((mx[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn mass_is_conserved() {
        for preset in [
            Preset::Dk,
            Preset::Mt,
            Preset::Hayes,
            Preset::ApqDk { alpha: 0.5, p: 0.5, q: 0.5 },
            Preset::ApqMt { alpha: 0.3, p: 0.9, q: 0.2 },
        ] {
            let p = preset.params().unwrap();
            for n in [1, 2, 5, 17, 60] {
                let d = exact_final_distribution(n, &p).unwrap();
                assert!((d.total_mass() - 1.0).abs() <= 1e-12, "{preset:?} n={n}");
            }
        }
    }

    #[test]
    fn bitwise_lambda_invariance() {
        let p = Preset::ApqDk { alpha: 0.5, p: 0.5, q: 0.5 }.params().unwrap();
        let a = exact_final_distribution(25, &p).unwrap();
        for lambda in [0.5, 7.0, 123.0] {
            let b = exact_final_distribution(25, &p.with_lambda(lambda).unwrap()).unwrap();
            assert!(a.probs.iter().zip(&b.probs).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn size_limit() {
        let p = Preset::Dk.params().unwrap();
        assert!(matches!(exact_final_distribution(61, &p), Err(Error::TooLarge { n: 61, max: 60 })));
        assert!(exact_final_distribution_with_limit(80, &p, 100).is_ok());
    }
}
