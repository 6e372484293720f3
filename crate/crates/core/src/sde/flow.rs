//! Euler–Maruyama flows and the grid cocycle property.
//!
//! Every simulation in the crate advances through [`EulerStepper::step`], so
//! a run split at step `k` and restarted on the shifted path performs the
//! same floating-point operations as the unsplit run and lands on the same
//! bits.

use serde::Serialize;

use super::model::Sde;
use super::noise::NoisePath;
use crate::error::{Error, Result};

/// Reusable scratch space for one-step updates.
pub struct EulerStepper<'a, S: Sde + ?Sized> {
    sde: &'a S,
    drift: Vec<f64>,
    diffusion: Vec<f64>,
}

impl<'a, S: Sde + ?Sized> EulerStepper<'a, S> {
    pub fn new(sde: &'a S) -> Self {
        let n = sde.dim_state();
        let d = sde.dim_noise();
        Self {
            sde,
            drift: vec![0.0; n],
            diffusion: vec![0.0; n * d],
        }
    }

    /// `x ← x + f(x)Δt + g(x)ΔW`, with the noise sum taken over components
    /// in increasing order.
    pub fn step(&mut self, x: &mut [f64], dw: &[f64], dt: f64) {
        let d = dw.len();
        self.sde.drift(x, &mut self.drift);
        self.sde.diffusion(x, &mut self.diffusion);
        for (i, xi) in x.iter_mut().enumerate() {
            let mut noise = 0.0;
            for (g, w) in self.diffusion[i * d..(i + 1) * d].iter().zip(dw) {
                noise += g * w;
            }
            *xi = *xi + self.drift[i] * dt + noise;
        }
    }
}

fn check_inputs<S: Sde + ?Sized>(sde: &S, x: &[f64], w: &NoisePath, steps: usize) -> Result<()> {
    if x.len() != sde.dim_state() {
        return Err(Error::DimensionMismatch {
            expected: sde.dim_state(),
            got: x.len(),
        });
    }
    if w.dim() != sde.dim_noise() {
        return Err(Error::DimensionMismatch {
            expected: sde.dim_noise(),
            got: w.dim(),
        });
    }
    if steps > w.steps() {
        return Err(Error::HorizonExceeded {
            requested: steps,
            available: w.steps(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResult {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl FlowResult {
    pub fn terminal(&self) -> &[f64] {
        self.states.last().expect("flow has an initial state")
    }
}

/// The Euler–Maruyama solution on the first `steps` grid intervals of `w`.
pub fn euler_flow<S: Sde + ?Sized>(
    sde: &S,
    x: &[f64],
    w: &NoisePath,
    steps: usize,
) -> Result<FlowResult> {
    check_inputs(sde, x, w, steps)?;
    let dt = w.dt();
    let mut stepper = EulerStepper::new(sde);
    let mut state = x.to_vec();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state.clone());
    for k in 0..steps {
        stepper.step(&mut state, w.increment(k), dt);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Explosion { step: k + 1 });
        }
        states.push(state.clone());
    }
    let times = (0..=steps).map(|k| k as f64 * dt).collect();
    Ok(FlowResult { times, states })
}

/// Terminal state only; same arithmetic as [`euler_flow`].
pub fn euler_terminal<S: Sde + ?Sized>(
    sde: &S,
    x: &[f64],
    w: &NoisePath,
    steps: usize,
) -> Result<Vec<f64>> {
    check_inputs(sde, x, w, steps)?;
    let dt = w.dt();
    let mut stepper = EulerStepper::new(sde);
    let mut state = x.to_vec();
    for k in 0..steps {
        stepper.step(&mut state, w.increment(k), dt);
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::Explosion { step: k + 1 });
        }
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CocycleReport {
    pub split_step: usize,
    pub further_steps: usize,
    /// `X^x_{s+t}(ω)`.
    pub unsplit: Vec<f64>,
    /// `X^{X^x_s(ω)}_t(θ_s ω)`.
    pub split: Vec<f64>,
    pub terminal_bitwise_equal: bool,
    /// Every intermediate state after the split matches too.
    pub trajectory_bitwise_equal: bool,
    /// `θ_t(θ_s ω) = θ_{s+t} ω`.
    pub shifted_paths_equal: bool,
    pub max_abs_diff: f64,
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        self.terminal_bitwise_equal && self.trajectory_bitwise_equal && self.shifted_paths_equal
    }
}

fn bitwise_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Compares the flow run for `k_s + k_t` steps with the flow run for `k_s`
/// steps and then restarted on the shifted path for `k_t` more.
pub fn cocycle_check<S: Sde + ?Sized>(
    sde: &S,
    x: &[f64],
    w: &NoisePath,
    k_s: usize,
    k_t: usize,
) -> Result<CocycleReport> {
    let total = k_s + k_t;
    let whole = euler_flow(sde, x, w, total)?;
    let first = euler_flow(sde, x, w, k_s)?;
    let shifted = w.shift(k_s)?;
    let second = euler_flow(sde, first.terminal(), &shifted, k_t)?;

    let unsplit = whole.terminal().to_vec();
    let split = second.terminal().to_vec();
    let trajectory_bitwise_equal = whole.states[k_s..]
        .iter()
        .zip(&second.states)
        .all(|(a, b)| bitwise_eq(a, b));
    let shifted_paths_equal = shifted.shift(k_t)?.increments() == w.shift(total)?.increments();
    let max_abs_diff = unsplit
        .iter()
        .zip(&split)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(CocycleReport {
        split_step: k_s,
        further_steps: k_t,
        terminal_bitwise_equal: bitwise_eq(&unsplit, &split),
        unsplit,
        split,
        trajectory_bitwise_equal,
        shifted_paths_equal,
        max_abs_diff,
    })
}
