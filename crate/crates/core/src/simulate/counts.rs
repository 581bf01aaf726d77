use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const RESAMPLE_BUDGET: usize = 10_000;

/// Round away from zero, treating values within `1e-9` of an integer as that
/// integer so that e.g. `0.3 * 10` maps to 3.
pub fn round_away_from_zero(x: f64) -> i64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        return nearest as i64;
    }
    if x > 0.0 {
        x.ceil() as i64
    } else {
        x.floor() as i64
    }
}

/// One draw of `(N_A, N_B, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsDraw {
    pub sell_count: u32,
    pub buy_count: u32,
    pub imbalance: i64,
}

/// Joint law of the limit order counts and the market order imbalance.
///
/// `(N_A, N_B)` follows a pmf on `{1..N}²` conditioned on `N_A != N_B`, and
/// `Δ = round_away_from_zero(c (N_A - N_B))`. With `0 < c < 1` this keeps
/// `Δ` in `(-N_B, N_A)`, nonzero and with the sign of `N_A - N_B`.
#[derive(Debug, Clone)]
pub struct CountsModel {
    max_count: u32,
    c: f64,
    pairs: Vec<(u32, u32)>,
    weights: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl CountsModel {
    /// Arbitrary nonnegative weights over pairs in `{1..max_count}²`.
    pub fn from_weights(max_count: u32, c: f64, weighted: Vec<((u32, u32), f64)>) -> Result<Self> {
        if max_count == 0 {
            return Err(Error::domain("max_count must be positive"));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::domain(format!("c = {c} must lie in (0, 1)")));
        }
        let mut pairs = Vec::with_capacity(weighted.len());
        let mut weights = Vec::with_capacity(weighted.len());
        for ((n_a, n_b), w) in weighted {
            if n_a == 0 || n_b == 0 || n_a > max_count || n_b > max_count {
                return Err(Error::domain(format!(
                    "pair ({n_a}, {n_b}) outside {{1..{max_count}}}²"
                )));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("weight {w} must be nonnegative")));
            }
            if w > 0.0 {
                pairs.push((n_a, n_b));
                weights.push(w);
            }
        }
        if !pairs.iter().any(|(a, b)| a != b) {
            return Err(Error::domain("pmf has no mass off the diagonal N_A = N_B"));
        }
        let sampler = WeightedIndex::new(&weights)
            .map_err(|e| Error::domain(format!("invalid pmf weights: {e}")))?;
        Ok(Self {
            max_count,
            c,
            pairs,
            weights,
            sampler,
        })
    }

    /// Uniform pmf on `{min_count..max_count}²`.
    pub fn uniform(min_count: u32, max_count: u32, c: f64) -> Result<Self> {
        if min_count == 0 || min_count > max_count {
            return Err(Error::domain(format!(
                "count range {min_count}..={max_count} is empty or includes 0"
            )));
        }
        let weighted = (min_count..=max_count)
            .flat_map(|a| (min_count..=max_count).map(move |b| ((a, b), 1.0)))
            .collect();
        Self::from_weights(max_count, c, weighted)
    }

    /// Uniform pmf on the pairs in `{1..max_count}²` where `c (N_A - N_B)` is
    /// a nonzero integer, so that `Δ = c (N_A - N_B)` holds without rounding.
    pub fn lattice(max_count: u32, c: f64) -> Result<Self> {
        let weighted = (1..=max_count)
            .flat_map(|a| (1..=max_count).map(move |b| (a, b)))
            .filter(|&(a, b)| {
                let d = c * (a as f64 - b as f64);
                a != b && (d - d.round()).abs() <= 1e-9 * d.abs().max(1.0)
            })
            .map(|p| (p, 1.0))
            .collect::<Vec<_>>();
        if weighted.is_empty() {
            return Err(Error::domain(format!(
                "no pair in {{1..{max_count}}}² has integral c (N_A - N_B) for c = {c}"
            )));
        }
        Self::from_weights(max_count, c, weighted)
    }

    pub fn max_count(&self) -> u32 {
        self.max_count
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn imbalance(&self, sell_count: u32, buy_count: u32) -> i64 {
        round_away_from_zero(self.c * (sell_count as f64 - buy_count as f64))
    }

    /// The effective law of `(N_A, N_B, Δ)`: the pmf conditioned on
    /// `N_A != N_B`, with probabilities summing to one.
    pub fn support(&self) -> Vec<(CountsDraw, f64)> {
        let off_diag: f64 = self
            .pairs
            .iter()
            .zip(&self.weights)
            .filter(|((a, b), _)| a != b)
            .map(|(_, w)| w)
            .sum();
        self.pairs
            .iter()
            .zip(&self.weights)
            .filter(|((a, b), _)| a != b)
            .map(|(&(a, b), &w)| {
                (
                    CountsDraw {
                        sell_count: a,
                        buy_count: b,
                        imbalance: self.imbalance(a, b),
                    },
                    w / off_diag,
                )
            })
            .collect()
    }

    /// Draws `(N_A, N_B, Δ)`, resampling diagonal pairs.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CountsDraw> {
        for _ in 0..RESAMPLE_BUDGET {
            let (a, b) = self.pairs[self.sampler.sample(rng)];
            if a != b {
                return Ok(CountsDraw {
                    sell_count: a,
                    buy_count: b,
                    imbalance: self.imbalance(a, b),
                });
            }
        }
        Err(Error::ResamplingExhausted(RESAMPLE_BUDGET))
    }
}

pub fn sample_counts<R: Rng + ?Sized>(model: &CountsModel, rng: &mut R) -> Result<CountsDraw> {
    model.sample(rng)
}
