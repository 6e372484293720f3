//! Left-point stochastic integrals and their behaviour under the shift.

use rand::Rng;
use serde::Serialize;

use super::noise::NoisePath;
use crate::error::{Error, Result};

/// An adapted integrand `H`, evaluated on a path at grid index `k` using only
/// `W_0, …, W_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Integrand {
    /// `H ≡ 1` in every component.
    One,
    /// `H_u = W_u` componentwise.
    Path,
    /// `H_u = c_i + a_i · W_{t_i}` on `[t_i, t_{i+1})`, i.e. an elementary
    /// predictable process whose level on each interval is fixed by the
    /// path at the interval's left end.
    Elementary {
        breaks: Vec<usize>,
        consts: Vec<f64>,
        slopes: Vec<f64>,
    },
}

impl Integrand {
    /// A random elementary integrand with up to `pieces` intervals over
    /// `steps` grid steps.
    pub fn random_elementary<R: Rng>(rng: &mut R, steps: usize, pieces: usize) -> Self {
        let mut breaks: Vec<usize> = (0..pieces.max(1))
            .map(|_| rng.random_range(0..steps.max(1)))
            .collect();
        breaks.push(0);
        breaks.sort_unstable();
        breaks.dedup();
        let consts = breaks.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
        let slopes = breaks.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
        Integrand::Elementary {
            breaks,
            consts,
            slopes,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Integrand::Elementary {
            breaks,
            consts,
            slopes,
        } = self
        {
            if breaks.first() != Some(&0) || breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(
                    "elementary breaks must start at 0 and increase strictly".into(),
                ));
            }
            if consts.len() != breaks.len() || slopes.len() != breaks.len() {
                return Err(Error::InvalidArgument(
                    "elementary integrand needs one constant and one slope per interval".into(),
                ));
            }
        }
        Ok(())
    }

    /// `H_0, …, H_{m−1}` on `w`, one row of `w.dim()` values per step.
    pub fn evaluate(&self, w: &NoisePath) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let values = w.values();
        let m = w.steps();
        let d = w.dim();
        Ok(match self {
            Integrand::One => vec![vec![1.0; d]; m],
            Integrand::Path => values.into_iter().take(m).collect(),
            Integrand::Elementary {
                breaks,
                consts,
                slopes,
            } => {
                let mut out = Vec::with_capacity(m);
                let mut piece = 0;
                for _k in 0..m {
                    while piece + 1 < breaks.len() && breaks[piece + 1] <= out.len() {
                        piece += 1;
                    }
                    let anchor = &values[breaks[piece].min(m)];
                    out.push(
                        anchor
                            .iter()
                            .map(|wa| consts[piece] + slopes[piece] * wa)
                            .collect(),
                    );
                }
                out
            }
        })
    }
}

/// `Σ_{k ∈ range} Σ_j H[k − range.start][j] · ΔW_k[j]`, summed in order.
pub fn left_riemann(h: &[Vec<f64>], w: &NoisePath, range: std::ops::Range<usize>) -> f64 {
    let mut total = 0.0;
    for (hk, k) in h.iter().zip(range) {
        for (a, b) in hk.iter().zip(w.increment(k)) {
            total += a * b;
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedIntegralReport {
    pub shift: usize,
    pub length: usize,
    /// `∫₀ᵗ H(θ_s ω)_u · d(θ_s ω)_u`.
    pub shifted_integral: f64,
    /// `∫_s^{s+t} H(θ_s ω)_{u−s} · dω_u`.
    pub reindexed_integral: f64,
    pub bitwise_equal: bool,
}

/// Checks that integrating the shifted integrand against the shifted path
/// over `[0, t]` equals integrating it, delayed by `s`, against the original
/// path over `[s, s + t]`, where `s = k_s·Δt` and `t` covers the rest of `w`.
pub fn shifted_integral_check(
    h: &Integrand,
    w: &NoisePath,
    k_s: usize,
) -> Result<ShiftedIntegralReport> {
    let shifted = w.shift(k_s)?;
    let length = shifted.steps();
    let h_shifted = h.evaluate(&shifted)?;
    let shifted_integral = left_riemann(&h_shifted, &shifted, 0..length);
    let reindexed_integral = left_riemann(&h_shifted, w, k_s..k_s + length);
    Ok(ShiftedIntegralReport {
        shift: k_s,
        length,
        shifted_integral,
        reindexed_integral,
        bitwise_equal: shifted_integral.to_bits() == reindexed_integral.to_bits(),
    })
}
