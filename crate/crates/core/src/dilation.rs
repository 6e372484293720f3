//! Deterministic dynamical systems on finite product spaces `E × F`.
//!
//! A system `(x, y) ↦ (X(x,y), Y(x,y))` together with a probability `μ` on
//! the environment `F` reduces to the Markov kernel
//! `P(x, j) = μ{y : X(x,y) = j}`. Conversely every finite kernel is the
//! reduction of a system built on `F = E^E`, the set of all point maps, with
//! the product weights `μ(y) = ∏_x P(x, y(x))`.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::{validate_weights, MarkovKernel, StateSpace, INTERNAL_TOL};

/// Default cap on the number of materialized environment points.
pub const DEFAULT_ENV_CAP: u128 = 1_000_000;

/// A finite probability space `(F, μ)`.
///
/// Environments produced by [`dilate`] also carry, for every point, the
/// underlying function `y: E → E` as an index vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    functions: Option<Vec<Vec<usize>>>,
}

impl EnvironmentSpace {
    pub fn new(
        labels: Vec<String>,
        weights: Vec<f64>,
        functions: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyStateSpace);
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        validate_weights(&weights, labels.len())?;
        if let Some(fs) = &functions {
            if fs.len() != labels.len() {
                return Err(Error::DimensionMismatch {
                    expected: labels.len(),
                    got: fs.len(),
                });
            }
        }
        Ok(Self {
            labels,
            weights,
            functions,
        })
    }

    /// Environment points labelled `"1"..="m"` for `m = weights.len()`.
    pub fn numbered(weights: Vec<f64>) -> Result<Self> {
        let labels = (1..=weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights, None)
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn functions(&self) -> Option<&[Vec<usize>]> {
        self.functions.as_deref()
    }
}

/// A map `T(x, y) = (X(x,y), Y(x,y))` on `E × F`, stored as two tables
/// indexed `[x][y]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductDynamicalSystem {
    states: StateSpace,
    env: EnvironmentSpace,
    x_map: Vec<usize>,
    y_map: Vec<usize>,
}

impl ProductDynamicalSystem {
    pub fn new(
        states: StateSpace,
        env: EnvironmentSpace,
        x_map: Vec<Vec<usize>>,
        y_map: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let x_map = flatten_table(x_map, states.size(), env.size(), states.size())?;
        let y_map = flatten_table(y_map, states.size(), env.size(), env.size())?;
        Ok(Self {
            states,
            env,
            x_map,
            y_map,
        })
    }

    fn from_raw(
        states: StateSpace,
        env: EnvironmentSpace,
        x_map: Vec<usize>,
        y_map: Vec<usize>,
    ) -> Self {
        debug_assert_eq!(x_map.len(), states.size() * env.size());
        debug_assert_eq!(y_map.len(), states.size() * env.size());
        Self {
            states,
            env,
            x_map,
            y_map,
        }
    }

    /// The rotation of `{1,2} × {1,2}`
    /// `(1,1) → (2,1) → (2,2) → (1,2) → (1,1)` with environment weights
    /// `μ = (μ₁, μ₂)`.
    pub fn rotation(mu: [f64; 2]) -> Result<Self> {
        let states = StateSpace::numbered(2)?;
        let env = EnvironmentSpace::numbered(mu.to_vec())?;
        Self::new(
            states,
            env,
            vec![vec![1, 0], vec![1, 0]],
            vec![vec![0, 0], vec![1, 1]],
        )
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn env(&self) -> &EnvironmentSpace {
        &self.env
    }

    pub fn x_at(&self, x: usize, y: usize) -> usize {
        self.x_map[x * self.env.size() + y]
    }

    pub fn y_at(&self, x: usize, y: usize) -> usize {
        self.y_map[x * self.env.size() + y]
    }

    pub fn step(&self, x: usize, y: usize) -> (usize, usize) {
        let k = x * self.env.size() + y;
        (self.x_map[k], self.y_map[k])
    }

    pub fn x_table(&self) -> Vec<Vec<usize>> {
        self.x_map
            .chunks(self.env.size())
            .map(<[usize]>::to_vec)
            .collect()
    }

    pub fn y_table(&self) -> Vec<Vec<usize>> {
        self.y_map
            .chunks(self.env.size())
            .map(<[usize]>::to_vec)
            .collect()
    }

    /// Averages the environment out: `P(x, j) = Σ_{y : X(x,y) = j} μ(y)`.
    /// `Y` is not read.
    pub fn reduce(&self) -> MarkovKernel {
        let n = self.states.size();
        let mut probs = vec![0.0; n * n];
        for x in 0..n {
            for (y, &w) in self.env.weights().iter().enumerate() {
                probs[x * n + self.x_at(x, y)] += w;
            }
        }
        MarkovKernel::from_raw(self.states.clone(), probs)
    }

    /// The `m`-fold composition `T^m` as a system on the same spaces.
    pub fn iterate(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "iteration count must be at least 1".into(),
            ));
        }
        let n = self.states.size();
        let f = self.env.size();
        let mut x_map = Vec::with_capacity(n * f);
        let mut y_map = Vec::with_capacity(n * f);
        for x in 0..n {
            for y in 0..f {
                let (mut a, mut b) = (x, y);
                for _ in 0..m {
                    (a, b) = self.step(a, b);
                }
                x_map.push(a);
                y_map.push(b);
            }
        }
        Ok(Self::from_raw(
            self.states.clone(),
            self.env.clone(),
            x_map,
            y_map,
        ))
    }

    /// Whether `T` is a bijection of `E × F`, by exhaustive image count.
    pub fn is_bijective(&self) -> bool {
        let f = self.env.size();
        let total = self.x_map.len();
        let mut hit = vec![false; total];
        for (&a, &b) in self.x_map.iter().zip(&self.y_map) {
            let k = a * f + b;
            if std::mem::replace(&mut hit[k], true) {
                return false;
            }
        }
        true
    }
}

fn flatten_table(
    table: Vec<Vec<usize>>,
    rows: usize,
    cols: usize,
    bound: usize,
) -> Result<Vec<usize>> {
    if table.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: table.len(),
        });
    }
    let mut flat = Vec::with_capacity(rows * cols);
    for (row, r) in table.into_iter().enumerate() {
        if r.len() != cols {
            return Err(Error::RaggedRow {
                row,
                expected: cols,
                got: r.len(),
            });
        }
        for (col, &value) in r.iter().enumerate() {
            if value >= bound {
                return Err(Error::MapOutOfRange {
                    row,
                    col,
                    value,
                    bound,
                });
            }
        }
        flat.extend(r);
    }
    Ok(flat)
}

fn function_space_size(n: usize) -> u128 {
    u32::try_from(n)
        .ok()
        .and_then(|e| (n as u128).checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// All `n^n` point maps `y: E → E` in lexicographic order of
/// `(y(x₁), …, y(xₙ))`, with product weights `∏_x P(x, y(x))`.
fn function_environment(k: &MarkovKernel, cap: u128) -> Result<(Vec<Vec<usize>>, Vec<f64>)> {
    let n = k.size();
    let size = function_space_size(n);
    if size > cap {
        return Err(Error::EnvironmentTooLarge { size, cap });
    }
    let m = size as usize;
    let mut functions = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut digits = vec![0usize; n];
    for _ in 0..m {
        weights.push(
            digits
                .iter()
                .enumerate()
                .map(|(x, &j)| k.get(x, j))
                .product(),
        );
        functions.push(digits.clone());
        // odometer, last coordinate fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < n {
                break;
            }
            *d = 0;
        }
    }
    Ok((functions, weights))
}

fn function_label(states: &StateSpace, y: &[usize]) -> String {
    let parts: Vec<&str> = y.iter().map(|&j| states.label(j)).collect();
    format!("({})", parts.join(","))
}

/// Dilation of `k` on `E × E^E`: `T(x, y) = (y(x), y)`.
pub fn dilate(k: &MarkovKernel, cap: u128) -> Result<ProductDynamicalSystem> {
    let states = k.space().clone();
    let n = states.size();
    let (functions, weights) = function_environment(k, cap)?;
    let m = functions.len();
    let labels = functions
        .iter()
        .map(|y| function_label(&states, y))
        .collect();
    let mut x_map = Vec::with_capacity(n * m);
    let mut y_map = Vec::with_capacity(n * m);
    for x in 0..n {
        for (yi, y) in functions.iter().enumerate() {
            x_map.push(y[x]);
            y_map.push(yi);
        }
    }
    let env = EnvironmentSpace {
        labels,
        weights,
        functions: Some(functions),
    };
    debug_assert!(
        (env.weights.iter().sum::<f64>() - 1.0).abs()
            <= k.row_sum_defect() * n as f64 + INTERNAL_TOL
    );
    Ok(ProductDynamicalSystem::from_raw(states, env, x_map, y_map))
}

/// Invertible dilation of `k` on `E × (E × E^E)` with environment weight
/// `δ_{x₀} ⊗ μ`:
///
/// ```text
/// T'(x, (x₀, y))   = (y(x), (x, y))
/// T'(x, (y(x), y)) = (x₀,   (x, y))     when y(x) ≠ x₀
/// T'(x, (z, y))    = (z,    (x, y))     otherwise
/// ```
///
/// For fixed `(x, y)` the first coordinate is transformed by the
/// transposition of `x₀` and `y(x)`, so `T'` is a bijection.
pub fn dilate_invertible(k: &MarkovKernel, x0: usize, cap: u128) -> Result<ProductDynamicalSystem> {
    let states = k.space().clone();
    let n = states.size();
    if x0 >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0,
        });
    }
    let base_size = function_space_size(n);
    let size = base_size.saturating_mul(n as u128);
    if size > cap {
        return Err(Error::EnvironmentTooLarge { size, cap });
    }
    let (functions, base_weights) = function_environment(k, cap)?;
    let m = functions.len();

    let mut labels = Vec::with_capacity(n * m);
    let mut weights = Vec::with_capacity(n * m);
    for z in 0..n {
        for (y, w) in functions.iter().zip(&base_weights) {
            labels.push(format!(
                "{};{}",
                states.label(z),
                function_label(&states, y)
            ));
            weights.push(if z == x0 { *w } else { 0.0 });
        }
    }

    let mut x_map = Vec::with_capacity(n * n * m);
    let mut y_map = Vec::with_capacity(n * n * m);
    for x in 0..n {
        for z in 0..n {
            for (yi, y) in functions.iter().enumerate() {
                let yx = y[x];
                let out = if z == x0 {
                    yx
                } else if z == yx {
                    x0
                } else {
                    z
                };
                x_map.push(out);
                y_map.push(x * m + yi);
            }
        }
    }
    let env = EnvironmentSpace {
        labels,
        weights,
        functions: None,
    };
    Ok(ProductDynamicalSystem::from_raw(states, env, x_map, y_map))
}
