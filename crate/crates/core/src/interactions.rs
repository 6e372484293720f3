//! Repeated interactions: the system meets a fresh, independent copy of the
//! environment at every step.
//!
//! On `E × F^ℕ*` the map `(x, (y₁, y₂, …)) ↦ (X(x, y₁), (y₂, y₃, …))`
//! averages to the `n`-th power of the one-step kernel after `n` steps. Only
//! the first `n` copies are ever read, so sequences are drawn lazily.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dilation::{dilate, ProductDynamicalSystem};
use crate::error::{Error, Result};
use crate::markov::{FiniteMeasure, MarkovKernel};
use crate::rng::stream_rng;

/// Default cap on the number of environment tuples enumerated exactly.
pub const DEFAULT_EXACT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionChain {
    base: ProductDynamicalSystem,
    horizon: usize,
}

/// A sampled path `x₀, …, x_n` with the environment points that drove it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub env_draws: Vec<usize>,
}

/// Empirical law of `x_n` with per-state standard errors
/// `√(p̂(1 − p̂) / samples)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub distribution: FiniteMeasure,
    pub std_errors: Vec<f64>,
    pub counts: Vec<u64>,
    pub samples: u64,
}

impl InteractionChain {
    pub fn new(base: ProductDynamicalSystem, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        Ok(Self { base, horizon })
    }

    /// Chain over the function-space dilation of `k`.
    pub fn from_kernel(k: &MarkovKernel, horizon: usize, env_cap: u128) -> Result<Self> {
        Self::new(dilate(k, env_cap)?, horizon)
    }

    pub fn base(&self) -> &ProductDynamicalSystem {
        &self.base
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn check_start(&self, x: usize, n: usize) -> Result<()> {
        let size = self.base.states().size();
        if x >= size {
            return Err(Error::DimensionMismatch {
                expected: size,
                got: x,
            });
        }
        if n > self.horizon {
            return Err(Error::HorizonExceeded {
                requested: n,
                available: self.horizon,
            });
        }
        Ok(())
    }

    /// Exact law of `x_n` started from `x`, summing `∏_k μ(y_k)` over every
    /// tuple `(y₁, …, y_n) ∈ F^n`.
    pub fn reduce_n_exact(&self, x: usize, n: usize, cap: u128) -> Result<FiniteMeasure> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "step count must be at least 1".into(),
            ));
        }
        self.check_start(x, n)?;
        let f = self.base.env().size() as u128;
        let size = u32::try_from(n)
            .ok()
            .and_then(|e| f.checked_pow(e))
            .unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::EnumerationTooLarge { size, cap });
        }
        let mut law = vec![0.0; self.base.states().size()];
        self.accumulate(x, n, 1.0, &mut law);
        Ok(FiniteMeasure::from_raw(self.base.states().clone(), law))
    }

    fn accumulate(&self, x: usize, remaining: usize, weight: f64, law: &mut [f64]) {
        if remaining == 0 {
            law[x] += weight;
            return;
        }
        for (y, &w) in self.base.env().weights().iter().enumerate() {
            self.accumulate(self.base.x_at(x, y), remaining - 1, weight * w, law);
        }
    }

    /// Monte Carlo estimate of the law of `x_n`. Sample `i` draws its
    /// environment sequence from stream `i` of `seed`.
    pub fn reduce_n_monte_carlo(
        &self,
        x: usize,
        n: usize,
        samples: u64,
        seed: u64,
    ) -> Result<MonteCarloEstimate> {
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        self.check_start(x, n)?;
        let size = self.base.states().size();
        let sampler = EnvSampler::new(self.base.env().weights());
        let counts = (0..samples)
            .into_par_iter()
            .fold(
                || vec![0u64; size],
                |mut acc, i| {
                    let mut rng = stream_rng(seed, i);
                    let mut state = x;
                    for _ in 0..n {
                        state = self.base.x_at(state, sampler.draw(&mut rng));
                    }
                    acc[state] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; size],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(s, c)| *s += c);
                    a
                },
            );
        let total = samples as f64;
        let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
        let std_errors = probs
            .iter()
            .map(|p| (p * (1.0 - p) / total).sqrt())
            .collect();
        Ok(MonteCarloEstimate {
            distribution: FiniteMeasure::from_raw(self.base.states().clone(), probs),
            std_errors,
            counts,
            samples,
        })
    }

    /// One path of length `n` from `x`, using stream 0 of `seed`.
    pub fn sample_trajectory(&self, x: usize, n: usize, seed: u64) -> Result<Trajectory> {
        self.check_start(x, n)?;
        let sampler = EnvSampler::new(self.base.env().weights());
        let mut rng = stream_rng(seed, 0);
        let mut states = Vec::with_capacity(n + 1);
        let mut env_draws = Vec::with_capacity(n);
        states.push(x);
        let mut state = x;
        for _ in 0..n {
            let y = sampler.draw(&mut rng);
            state = self.base.x_at(state, y);
            env_draws.push(y);
            states.push(state);
        }
        Ok(Trajectory { states, env_draws })
    }
}

/// Inverse-CDF sampling from the environment weights.
struct EnvSampler {
    cumulative: Vec<f64>,
}

impl EnvSampler {
    fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty environment");
        let u: f64 = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        // u can round up to `total`; fall back to the last positive weight
        if i < self.cumulative.len() {
            i
        } else {
            let last = self.cumulative.len() - 1;
            (0..=last)
                .rev()
                .find(|&j| j == 0 || self.cumulative[j] > self.cumulative[j - 1])
                .unwrap_or(last)
        }
    }
}
