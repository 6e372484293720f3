//! Brownian paths on a uniform grid, stored as their increments.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Where a path's increments came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream: u64,
    /// Number of leading increments dropped by shifts.
    pub offset: usize,
}

/// A `d`-dimensional Brownian path on the grid `0, Δt, …, mΔt`, with
/// `W₀ = 0` and `W_{kΔt} = Σ_{j<k} ΔW_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisePath {
    dt: f64,
    dim: usize,
    increments: Vec<f64>,
    provenance: Option<Provenance>,
}

fn check_grid(dt: f64, steps: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    Ok(())
}

/// i.i.d. `N(0, dt)` increments from stream 0 of `seed`.
pub fn sample_path(dim: usize, dt: f64, steps: usize, seed: u64) -> Result<NoisePath> {
    NoisePath::sample(dim, dt, steps, seed, 0)
}

impl NoisePath {
    /// i.i.d. `N(0, dt)` increments from stream `stream` of `seed`; row `k`
    /// holds the `dim` components of `ΔW_k`.
    pub fn sample(dim: usize, dt: f64, steps: usize, seed: u64, stream: u64) -> Result<Self> {
        check_grid(dt, steps)?;
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "noise dimension must be at least 1".into(),
            ));
        }
        let mut rng = stream_rng(seed, stream);
        let scale = dt.sqrt();
        let increments = (0..steps * dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
            .collect();
        Ok(Self {
            dt,
            dim,
            increments,
            provenance: Some(Provenance {
                seed,
                stream,
                offset: 0,
            }),
        })
    }

    pub fn from_increments(dt: f64, increments: Vec<Vec<f64>>) -> Result<Self> {
        check_grid(dt, increments.len())?;
        let dim = increments[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "noise dimension must be at least 1".into(),
            ));
        }
        let mut flat = Vec::with_capacity(increments.len() * dim);
        for (row, r) in increments.into_iter().enumerate() {
            if r.len() != dim {
                return Err(Error::RaggedRow {
                    row,
                    expected: dim,
                    got: r.len(),
                });
            }
            if let Some(v) = r.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    index: row,
                    value: *v,
                });
            }
            flat.extend(r);
        }
        Ok(Self {
            dt,
            dim,
            increments: flat,
            provenance: None,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.increments.len() / self.dim
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn increment(&self, k: usize) -> &[f64] {
        &self.increments[k * self.dim..(k + 1) * self.dim]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `W_{kΔt}`, summed left to right.
    pub fn value_at(&self, k: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.dim];
        for j in 0..k {
            for (wi, dw) in w.iter_mut().zip(self.increment(j)) {
                *wi += dw;
            }
        }
        w
    }

    /// Every grid value `W_0, …, W_m`.
    pub fn values(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.steps() + 1);
        let mut w = vec![0.0; self.dim];
        out.push(w.clone());
        for dw in self.increments.chunks(self.dim) {
            for (wi, d) in w.iter_mut().zip(dw) {
                *wi += d;
            }
            out.push(w.clone());
        }
        out
    }

    /// The shift by `s = kΔt`: `(θ_s W)_t = W_{t+s} − W_s`. On the grid this
    /// drops the first `k` increments.
    pub fn shift(&self, k: usize) -> Result<NoisePath> {
        if k > self.steps() {
            return Err(Error::InvalidArgument(format!(
                "shift {k} exceeds path length {}",
                self.steps()
            )));
        }
        Ok(Self {
            dt: self.dt,
            dim: self.dim,
            increments: self.increments[k * self.dim..].to_vec(),
            provenance: self.provenance.map(|p| Provenance {
                offset: p.offset + k,
                ..p
            }),
        })
    }

    /// The same path seen on a grid `factor` times coarser; trailing steps
    /// that do not fill a coarse step are dropped.
    pub fn coarsen(&self, factor: usize) -> Result<NoisePath> {
        if factor == 0 || factor > self.steps() {
            return Err(Error::InvalidArgument(format!(
                "coarsening factor {factor} out of range 1..={}",
                self.steps()
            )));
        }
        let coarse_steps = self.steps() / factor;
        let mut increments = vec![0.0; coarse_steps * self.dim];
        for (c, chunk) in increments.chunks_mut(self.dim).enumerate() {
            for j in c * factor..(c + 1) * factor {
                for (acc, dw) in chunk.iter_mut().zip(self.increment(j)) {
                    *acc += dw;
                }
            }
        }
        Ok(Self {
            dt: self.dt * factor as f64,
            dim: self.dim,
            increments,
            provenance: None,
        })
    }
}

/// Same as [`NoisePath::shift`].
pub fn shift_path(w: &NoisePath, k: usize) -> Result<NoisePath> {
    w.shift(k)
}
