//! Monte Carlo estimation of `P_t h(x) = E[h(X^x_t)]`, the
//! Chapman–Kolmogorov check `P_t P_s = P_{s+t}`, and the generator
//! `A = Σ fᵢ ∂ᵢ + ½ Σ (ggᵀ)ᵢⱼ ∂ᵢ∂ⱼ`.
//!
//! Path `i` of an estimate is driven by stream `i` of its seed. Per-path
//! values are collected in path order and summed sequentially, so results
//! do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use super::flow::euler_terminal;
use super::model::Sde;
use super::noise::NoisePath;
use super::observable::TestFunction;
use crate::error::{Error, Result};
use crate::rng::sub_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExplosionPolicy {
    /// Any non-finite path fails the estimate.
    #[default]
    Abort,
    /// Non-finite paths are dropped and counted.
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemigroupEstimate {
    pub t: f64,
    pub steps: usize,
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub exploded: usize,
}

/// Number of grid steps `t / dt`, which must be a whole number.
pub fn grid_steps(t: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t must be nonnegative, got {t}"
        )));
    }
    let ratio = t / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} is not a whole number of steps of {dt}"
        )));
    }
    Ok(steps as usize)
}

fn check_start<S: Sde + ?Sized>(sde: &S, h: &TestFunction, x: &[f64]) -> Result<()> {
    if x.len() != sde.dim_state() {
        return Err(Error::DimensionMismatch {
            expected: sde.dim_state(),
            got: x.len(),
        });
    }
    h.check_dim(x.len())
}

/// `X^x_t` for paths `0..samples` of `seed`; `None` marks an explosion.
fn terminals<S: Sde + ?Sized>(
    sde: &S,
    x: &[f64],
    steps: usize,
    dt: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<Option<Vec<f64>>>> {
    if steps == 0 {
        return Ok(vec![Some(x.to_vec()); samples]);
    }
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let w = NoisePath::sample(sde.dim_noise(), dt, steps, seed, i as u64)?;
            match euler_terminal(sde, x, &w, steps) {
                Ok(end) => Ok(Some(end)),
                Err(Error::Explosion { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Sample mean and standard error of the mean.
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn apply_policy<T>(raw: Vec<Option<T>>, policy: ExplosionPolicy) -> Result<(Vec<T>, usize)> {
    let total = raw.len();
    let kept: Vec<T> = raw.into_iter().flatten().collect();
    let exploded = total - kept.len();
    if exploded > 0 && (policy == ExplosionPolicy::Abort || kept.len() < 2) {
        return Err(Error::PathsExploded {
            count: exploded,
            total,
        });
    }
    Ok((kept, exploded))
}

/// Monte Carlo estimate of `P_t h(x)` with `t / dt` Euler steps per path.
#[allow(clippy::too_many_arguments)]
pub fn estimate_semigroup<S: Sde + ?Sized>(
    sde: &S,
    h: &TestFunction,
    x: &[f64],
    t: f64,
    dt: f64,
    samples: usize,
    seed: u64,
    policy: ExplosionPolicy,
) -> Result<SemigroupEstimate> {
    let mut out = estimate_semigroup_many(
        sde,
        std::slice::from_ref(h),
        x,
        t,
        dt,
        samples,
        seed,
        policy,
    )?;
    Ok(out.remove(0))
}

/// Like [`estimate_semigroup`] for several observables evaluated on the
/// same paths.
#[allow(clippy::too_many_arguments)]
pub fn estimate_semigroup_many<S: Sde + ?Sized>(
    sde: &S,
    hs: &[TestFunction],
    x: &[f64],
    t: f64,
    dt: f64,
    samples: usize,
    seed: u64,
    policy: ExplosionPolicy,
) -> Result<Vec<SemigroupEstimate>> {
    for h in hs {
        check_start(sde, h, x)?;
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("samples must be at least 2".into()));
    }
    let steps = grid_steps(t, dt)?;
    let raw = terminals(sde, x, steps, dt, samples, seed)?;
    let (ends, exploded) = apply_policy(raw, policy)?;
    Ok(hs
        .iter()
        .map(|h| {
            let values: Vec<f64> = ends.iter().map(|e| h.eval(e)).collect();
            let (mean, std_error) = mean_and_se(&values);
            SemigroupEstimate {
                t,
                steps,
                mean,
                std_error,
                samples: values.len(),
                exploded,
            }
        })
        .collect())
}

/// `Ah(x) = Σᵢ fᵢ(x) ∂ᵢh(x) + ½ Σᵢⱼ Σ_α gᵢα(x) gⱼα(x) ∂ᵢ∂ⱼh(x)`.
pub fn apply_generator<S: Sde + ?Sized>(sde: &S, h: &TestFunction, x: &[f64]) -> Result<f64> {
    check_start(sde, h, x)?;
    let n = sde.dim_state();
    let d = sde.dim_noise();
    let (grad, hess) = h.derivatives(x)?;
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n * d];
    sde.drift(x, &mut f);
    sde.diffusion(x, &mut g);
    let first: f64 = f.iter().zip(&grad).map(|(a, b)| a * b).sum();
    let mut second = 0.0;
    for i in 0..n {
        for j in 0..n {
            let cov: f64 = (0..d).map(|a| g[i * d + a] * g[j * d + a]).sum();
            second += cov * hess[i * n + j];
        }
    }
    Ok(first + 0.5 * second)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChapmanKolmogorovReport {
    pub s: f64,
    pub t: f64,
    pub outer: usize,
    pub inner: usize,
    /// `P_t(P_s h)(x)`: outer paths to `t`, fresh inner paths to `s` from
    /// each endpoint.
    pub nested: f64,
    pub nested_std_error: f64,
    /// `P_{s+t} h(x)` from `outer · inner` independent paths.
    pub direct: f64,
    pub direct_std_error: f64,
    pub gap: f64,
    /// `4 √(se_nested² + se_direct²)`.
    pub bound: f64,
    pub exploded: usize,
    pub status: CheckStatus,
}

/// Seed roles inside [`chapman_kolmogorov_check`].
pub const CK_OUTER: u64 = 1;
pub const CK_INNER: u64 = 2;
pub const CK_DIRECT: u64 = 3;

#[allow(clippy::too_many_arguments)]
pub fn chapman_kolmogorov_check<S: Sde + ?Sized>(
    sde: &S,
    h: &TestFunction,
    x: &[f64],
    s: f64,
    t: f64,
    dt: f64,
    outer: usize,
    inner: usize,
    seed: u64,
    policy: ExplosionPolicy,
) -> Result<ChapmanKolmogorovReport> {
    check_start(sde, h, x)?;
    if outer < 2 || inner < 1 {
        return Err(Error::InvalidArgument(
            "need at least 2 outer and 1 inner paths".into(),
        ));
    }
    let outer_steps = grid_steps(t, dt)?;
    let inner_steps = grid_steps(s, dt)?;
    let total_steps = grid_steps(s + t, dt)?;

    let outer_seed = sub_seed(seed, CK_OUTER);
    let inner_seed = sub_seed(seed, CK_INNER);
    let raw = terminals(sde, x, outer_steps, dt, outer, outer_seed)?;
    let (ends, mut exploded) = apply_policy(raw, policy)?;

    let inner_means: Vec<Option<f64>> = ends
        .par_iter()
        .enumerate()
        .map(|(i, e)| -> Result<Option<f64>> {
            if inner_steps == 0 {
                return Ok(Some(h.eval(e)));
            }
            let mut acc = Vec::with_capacity(inner);
            for j in 0..inner {
                let stream = (i * inner + j) as u64;
                let w = NoisePath::sample(sde.dim_noise(), dt, inner_steps, inner_seed, stream)?;
                match euler_terminal(sde, e, &w, inner_steps) {
                    Ok(end) => acc.push(h.eval(&end)),
                    Err(Error::Explosion { .. }) => return Ok(None),
                    Err(err) => return Err(err),
                }
            }
            Ok(Some(acc.iter().sum::<f64>() / inner as f64))
        })
        .collect::<Result<_>>()?;
    let (inner_means, inner_exploded) = apply_policy(inner_means, policy)?;
    exploded += inner_exploded;
    let (nested, nested_std_error) = mean_and_se(&inner_means);

    let direct = estimate_semigroup(
        sde,
        h,
        x,
        total_steps as f64 * dt,
        dt,
        outer * inner,
        sub_seed(seed, CK_DIRECT),
        policy,
    )?;
    exploded += direct.exploded;

    let gap = (nested - direct.mean).abs();
    let bound = 4.0 * (nested_std_error.powi(2) + direct.std_error.powi(2)).sqrt();
    Ok(ChapmanKolmogorovReport {
        s,
        t,
        outer,
        inner,
        nested,
        nested_std_error,
        direct: direct.mean,
        direct_std_error: direct.std_error,
        gap,
        bound,
        exploded,
        status: if gap <= bound {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceQuotient {
    pub t: f64,
    /// `(P_t h(x) − h(x)) / t`.
    pub quotient: f64,
    pub std_error: f64,
    /// `quotient − Ah(x)`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorReport {
    pub generator: f64,
    pub quotients: Vec<DifferenceQuotient>,
    /// Least-squares slope of `gap ≈ C·t` through the origin.
    pub fitted_c: f64,
    pub final_gap: f64,
    /// `4σ + |C|·t` at the smallest horizon.
    pub bound: f64,
    /// `|gap|` shrinks from each horizon to the next.
    pub gap_decreasing: bool,
    pub status: CheckStatus,
}

/// Compares difference quotients of the estimated semigroup at decreasing
/// horizons with `Ah(x)`. All horizons reuse the same path streams.
///
/// The result is inconclusive when the Monte Carlo band at the smallest
/// horizon is wider than the largest quotient magnitude seen, i.e. noise
/// swamps the signal.
#[allow(clippy::too_many_arguments)]
pub fn generator_consistency_check<S: Sde + ?Sized>(
    sde: &S,
    h: &TestFunction,
    x: &[f64],
    dt: f64,
    samples: usize,
    seed: u64,
    horizons: &[f64],
    policy: ExplosionPolicy,
) -> Result<GeneratorReport> {
    if horizons.is_empty() {
        return Err(Error::InvalidArgument("need at least one horizon".into()));
    }
    if horizons.iter().any(|&t| t <= 0.0) || horizons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "horizons must be positive and strictly decreasing".into(),
        ));
    }
    let generator = apply_generator(sde, h, x)?;
    let h0 = h.eval(x);
    let mut quotients = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let est = estimate_semigroup(sde, h, x, t, dt, samples, seed, policy)?;
        let quotient = (est.mean - h0) / t;
        quotients.push(DifferenceQuotient {
            t,
            quotient,
            std_error: est.std_error / t,
            gap: quotient - generator,
        });
    }
    let num: f64 = quotients.iter().map(|q| q.t * q.gap).sum();
    let den: f64 = quotients.iter().map(|q| q.t * q.t).sum();
    let fitted_c = num / den;
    let last = quotients.last().expect("non-empty");
    let final_gap = last.gap.abs();
    let noise = 4.0 * last.std_error;
    let bound = noise + fitted_c.abs() * last.t;
    let gap_decreasing = quotients
        .windows(2)
        .all(|w| w[1].gap.abs() <= w[0].gap.abs());
    let signal = quotients
        .iter()
        .map(|q| q.quotient.abs())
        .fold(generator.abs(), f64::max);
    let status = if noise > 0.0 && noise > signal {
        CheckStatus::Inconclusive
    } else if final_gap <= bound {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(GeneratorReport {
        generator,
        final_gap,
        bound,
        gap_decreasing,
        status,
        fitted_c,
        quotients,
    })
}
