//! Drift and diffusion coefficients.
//!
//! [`Sde`] is the native interface: any `f: ℝⁿ → ℝⁿ` and `g: ℝⁿ → ℝ^{n×d}`
//! can be plugged in. [`SdeSpec`] is the named, serializable registry used at
//! the command line.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// An autonomous SDE `dX = f(X) dt + g(X) dW` on `ℝⁿ` driven by a
/// `d`-dimensional Brownian motion.
pub trait Sde: Sync {
    fn dim_state(&self) -> usize;
    fn dim_noise(&self) -> usize;
    /// Writes `f(x)` into `out` (length `n`).
    fn drift(&self, x: &[f64], out: &mut [f64]);
    /// Writes `g(x)` row-major into `out` (length `n·d`).
    fn diffusion(&self, x: &[f64], out: &mut [f64]);
}

/// Closure-backed SDE for caller-supplied coefficients.
pub struct FnSde<F, G> {
    pub dim_state: usize,
    pub dim_noise: usize,
    pub drift: F,
    pub diffusion: G,
}

impl<F, G> Sde for FnSde<F, G>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim_state(&self) -> usize {
        self.dim_state
    }
    fn dim_noise(&self) -> usize {
        self.dim_noise
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, out)
    }
    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(x, out)
    }
}

/// Registry models with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum SdeSpec {
    /// `f(x) = −Λx` with `Λ = diag(lambda)`, `g = sigma` (n×d).
    Ou {
        lambda: Vec<f64>,
        sigma: Vec<Vec<f64>>,
    },
    /// `f(x) = Ax + b`, `g = c` (n×d).
    Linear {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<Vec<f64>>,
    },
    /// `f(x) = a·x`, `g(x) = b·x`.
    #[serde(rename = "gbm-1d")]
    Gbm1d { a: f64, b: f64 },
    /// `f(x) = x − x³`, `g = sigma`.
    #[serde(rename = "double-well-1d")]
    DoubleWell1d { sigma: f64 },
}

pub const REGISTRY: [&str; 4] = ["ou", "linear", "gbm-1d", "double-well-1d"];

impl SdeSpec {
    pub fn ou(lambda: Vec<f64>, sigma: Vec<Vec<f64>>) -> Result<Self> {
        Self::Ou { lambda, sigma }.validated()
    }

    pub fn ou_1d(lambda: f64, sigma: f64) -> Self {
        Self::Ou {
            lambda: vec![lambda],
            sigma: vec![vec![sigma]],
        }
    }

    pub fn linear(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<Vec<f64>>) -> Result<Self> {
        Self::Linear { a, b, c }.validated()
    }

    pub fn gbm_1d(a: f64, b: f64) -> Self {
        Self::Gbm1d { a, b }
    }

    pub fn double_well_1d(sigma: f64) -> Self {
        Self::DoubleWell1d { sigma }
    }

    /// Looks up `name` in the registry and parses its JSON parameters.
    pub fn from_registry(name: &str, params: &Value) -> Result<Self> {
        let mut obj = match params {
            Value::Object(m) => m.clone(),
            Value::Null => Default::default(),
            _ => {
                return Err(Error::InvalidParameters(
                    "parameters must be a JSON object".into(),
                ))
            }
        };
        if !REGISTRY.contains(&name) {
            return Err(Error::InvalidParameters(format!(
                "unknown model {name:?}; expected one of {}",
                REGISTRY.join(", ")
            )));
        }
        obj.insert("model".into(), Value::String(name.into()));
        let spec: SdeSpec = serde_json::from_value(Value::Object(obj))
            .map_err(|e| Error::InvalidParameters(format!("{name}: {e}")))?;
        spec.validated()
    }

    pub fn name(&self) -> &'static str {
        match self {
            SdeSpec::Ou { .. } => "ou",
            SdeSpec::Linear { .. } => "linear",
            SdeSpec::Gbm1d { .. } => "gbm-1d",
            SdeSpec::DoubleWell1d { .. } => "double-well-1d",
        }
    }

    fn validated(self) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match &self {
            SdeSpec::Ou { lambda, sigma } => {
                let n = lambda.len();
                if n == 0 {
                    return bad("ou: lambda must be non-empty".into());
                }
                check_matrix("ou: sigma", sigma, n, None)?;
                if !finite(lambda) {
                    return bad("ou: lambda must be finite".into());
                }
            }
            SdeSpec::Linear { a, b, c } => {
                let n = b.len();
                if n == 0 {
                    return bad("linear: b must be non-empty".into());
                }
                check_matrix("linear: a", a, n, Some(n))?;
                check_matrix("linear: c", c, n, None)?;
                if !finite(b) {
                    return bad("linear: b must be finite".into());
                }
            }
            SdeSpec::Gbm1d { a, b } => {
                if !a.is_finite() || !b.is_finite() {
                    return bad("gbm-1d: a and b must be finite".into());
                }
            }
            SdeSpec::DoubleWell1d { sigma } => {
                if !sigma.is_finite() {
                    return bad("double-well-1d: sigma must be finite".into());
                }
            }
        }
        Ok(self)
    }
}

fn check_matrix(what: &str, m: &[Vec<f64>], rows: usize, cols: Option<usize>) -> Result<()> {
    if m.len() != rows {
        return Err(Error::InvalidParameters(format!(
            "{what} has {} rows, expected {rows}",
            m.len()
        )));
    }
    let cols = cols.unwrap_or_else(|| m[0].len());
    if cols == 0 {
        return Err(Error::InvalidParameters(format!("{what} has no columns")));
    }
    for (i, r) in m.iter().enumerate() {
        if r.len() != cols {
            return Err(Error::InvalidParameters(format!(
                "{what} row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "{what} entry ({i}, {j}) is not finite"
            )));
        }
    }
    Ok(())
}

impl Sde for SdeSpec {
    fn dim_state(&self) -> usize {
        match self {
            SdeSpec::Ou { lambda, .. } => lambda.len(),
            SdeSpec::Linear { b, .. } => b.len(),
            SdeSpec::Gbm1d { .. } | SdeSpec::DoubleWell1d { .. } => 1,
        }
    }

    fn dim_noise(&self) -> usize {
        match self {
            SdeSpec::Ou { sigma, .. } => sigma[0].len(),
            SdeSpec::Linear { c, .. } => c[0].len(),
            SdeSpec::Gbm1d { .. } | SdeSpec::DoubleWell1d { .. } => 1,
        }
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        match self {
            SdeSpec::Ou { lambda, .. } => {
                for ((o, l), xi) in out.iter_mut().zip(lambda).zip(x) {
                    *o = -l * xi;
                }
            }
            SdeSpec::Linear { a, b, .. } => {
                for ((o, row), bi) in out.iter_mut().zip(a).zip(b) {
                    *o = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>() + bi;
                }
            }
            SdeSpec::Gbm1d { a, .. } => out[0] = a * x[0],
            SdeSpec::DoubleWell1d { .. } => out[0] = x[0] - x[0] * x[0] * x[0],
        }
    }

    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        match self {
            SdeSpec::Ou { sigma: m, .. } | SdeSpec::Linear { c: m, .. } => {
                for (dst, v) in out.iter_mut().zip(m.iter().flatten()) {
                    *dst = *v;
                }
            }
            SdeSpec::Gbm1d { b, .. } => out[0] = b * x[0],
            SdeSpec::DoubleWell1d { sigma } => out[0] = *sigma,
        }
    }
}
