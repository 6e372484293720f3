//! Markov kernels as averaged deterministic dynamics.
//!
//! * [`markov`]: finite kernels, observables and measures.
//! * [`dilation`]: product-space systems, their reduction to kernels, and
//!   dilations of a kernel into a (possibly invertible) deterministic map.
//! * [`interactions`]: repeated interactions with fresh environment copies,
//!   which dilate every power of a kernel at once.
//! * [`randomness`]: determinism and invertibility diagnostics.
//! * [`sde`]: Euler–Maruyama flows, the path shift, and the Markov semigroup
//!   they average to.

pub mod dilation;
pub mod error;
pub mod interactions;
pub mod io;
pub mod markov;
pub mod randomness;
pub mod rng;
pub mod sde;

pub use dilation::{dilate, dilate_invertible, EnvironmentSpace, ProductDynamicalSystem};
pub use error::{Error, Result};
pub use interactions::{InteractionChain, MonteCarloEstimate, Trajectory};
pub use markov::{FiniteMeasure, MarkovKernel, Observable, StateSpace};
pub use randomness::{classify, homomorphism_defect, is_markov_invertible, KernelClass};
