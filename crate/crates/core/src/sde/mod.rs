//! Stochastic flows on a uniform time grid.
//!
//! The Euler–Maruyama solution `X^x_t(ω)` of `dX = f(X) dt + g(X) dW` together
//! with the path shift `θ_t` forms a deterministic dynamical system
//! `(x, ω) ↦ (X^x_t(ω), θ_t ω)` on `ℝⁿ × Ω`; averaging over `ω` gives the
//! Markov semigroup `P_t h(x) = E[h(X^x_t)]`.

mod flow;
mod integral;
mod model;
mod noise;
mod observable;
mod semigroup;

pub use flow::{
    cocycle_check, euler_flow, euler_terminal, CocycleReport, EulerStepper, FlowResult,
};
pub use integral::{left_riemann, shifted_integral_check, Integrand, ShiftedIntegralReport};
pub use model::{FnSde, Sde, SdeSpec, REGISTRY};
pub use noise::{sample_path, shift_path, NoisePath, Provenance};
pub use observable::TestFunction;
pub use semigroup::{
    apply_generator, chapman_kolmogorov_check, estimate_semigroup, estimate_semigroup_many,
    generator_consistency_check, grid_steps, ChapmanKolmogorovReport, CheckStatus,
    DifferenceQuotient, ExplosionPolicy, GeneratorReport, SemigroupEstimate, CK_DIRECT, CK_INNER,
    CK_OUTER,
};
