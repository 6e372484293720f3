//! Finite state spaces, Markov kernels as row-stochastic matrices, and their
//! actions on observables (functions) and on probability measures.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance used when validating externally supplied probabilities.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Tolerance asserted on kernels built internally from exact constructions.
pub const INTERNAL_TOL: f64 = 1e-12;

/// An ordered set of distinct state labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyStateSpace);
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// States labelled `"1"`, …, `"n"`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| i.to_string()))
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    pub(crate) fn check_same(&self, other: &StateSpace) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: other.size(),
            });
        }
        Ok(())
    }
}

/// A real-valued function on a finite state space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    space: StateSpace,
    values: Vec<f64>,
}

impl Observable {
    pub fn new(space: StateSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::DimensionMismatch {
                expected: space.size(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { space, values })
    }

    pub fn constant(space: StateSpace, c: f64) -> Self {
        let values = vec![c; space.size()];
        Self { space, values }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise square.
    pub fn squared(&self) -> Observable {
        Observable {
            space: self.space.clone(),
            values: self.values.iter().map(|v| v * v).collect(),
        }
    }
}

/// A probability measure on a finite state space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteMeasure {
    space: StateSpace,
    weights: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(space: StateSpace, weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, space.size())?;
        Ok(Self { space, weights })
    }

    pub(crate) fn from_raw(space: StateSpace, weights: Vec<f64>) -> Self {
        debug_assert_eq!(space.size(), weights.len());
        Self { space, weights }
    }

    pub fn dirac(space: StateSpace, index: usize) -> Result<Self> {
        if index >= space.size() {
            return Err(Error::DimensionMismatch {
                expected: space.size(),
                got: index,
            });
        }
        let mut weights = vec![0.0; space.size()];
        weights[index] = 1.0;
        Ok(Self { space, weights })
    }

    pub fn uniform(space: StateSpace) -> Self {
        let n = space.size();
        Self {
            weights: vec![1.0 / n as f64; n],
            space,
        }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Expectation of `f` under this measure.
    pub fn integrate(&self, f: &Observable) -> Result<f64> {
        self.space.check_same(f.space())?;
        Ok(self
            .weights
            .iter()
            .zip(f.values())
            .map(|(p, v)| p * v)
            .sum())
    }
}

pub(crate) fn validate_weights(weights: &[f64], expected: usize) -> Result<()> {
    if weights.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: weights.len(),
        });
    }
    for (index, &value) in weights.iter().enumerate() {
        if !value.is_finite() || !(-STOCHASTIC_TOL..=1.0 + STOCHASTIC_TOL).contains(&value) {
            return Err(Error::InvalidWeight { index, value });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::WeightSum(sum));
    }
    Ok(())
}

/// Row-stochastic transition matrix `P(i, j)` on a finite state space.
///
/// Acts on observables by `(Lf)(i) = Σ_j P(i,j) f(j)` and on measures by
/// `(pP)(j) = Σ_i p(i) P(i,j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovKernel {
    space: StateSpace,
    #[serde(skip)]
    n: usize,
    probs: Vec<f64>,
}

impl MarkovKernel {
    /// Validates `rows` against [`STOCHASTIC_TOL`]. Errors name the offending
    /// row and entry.
    pub fn new(space: StateSpace, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = space.size();
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        let mut probs = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::RaggedRow {
                    row,
                    expected: n,
                    got: r.len(),
                });
            }
            for (col, &value) in r.iter().enumerate() {
                if !value.is_finite() || !(-STOCHASTIC_TOL..=1.0 + STOCHASTIC_TOL).contains(&value)
                {
                    return Err(Error::InvalidProbability { row, col, value });
                }
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::RowSum { row, sum });
            }
            probs.extend_from_slice(r);
        }
        Ok(Self { space, n, probs })
    }

    /// Kernel on states `"1"..="n"` where `n = rows.len()`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let space = StateSpace::numbered(rows.len())?;
        Self::new(space, rows)
    }

    /// Builds from a row-major buffer produced by an exact internal
    /// construction.
    pub(crate) fn from_raw(space: StateSpace, probs: Vec<f64>) -> Self {
        let n = space.size();
        debug_assert_eq!(probs.len(), n * n);
        Self { space, n, probs }
    }

    pub fn identity(space: StateSpace) -> Self {
        let map: Vec<usize> = (0..space.size()).collect();
        Self::from_point_map(space, &map).expect("identity map is in range")
    }

    pub fn uniform(space: StateSpace) -> Self {
        let n = space.size();
        Self::from_raw(space, vec![1.0 / n as f64; n * n])
    }

    /// The deterministic kernel `P(i, ·) = δ_{map[i]}`.
    pub fn from_point_map(space: StateSpace, map: &[usize]) -> Result<Self> {
        let n = space.size();
        if map.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: map.len(),
            });
        }
        let mut probs = vec![0.0; n * n];
        for (i, &j) in map.iter().enumerate() {
            if j >= n {
                return Err(Error::MapOutOfRange {
                    row: i,
                    col: 0,
                    value: j,
                    bound: n,
                });
            }
            probs[i * n + j] = 1.0;
        }
        Ok(Self::from_raw(space, probs))
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.probs.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Largest `|Σ_j P(i,j) − 1|` over rows.
    pub fn row_sum_defect(&self) -> f64 {
        self.probs
            .chunks(self.n)
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise absolute difference; infinite on size mismatch.
    pub fn max_abs_diff(&self, other: &MarkovKernel) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn apply_to_observable(&self, f: &Observable) -> Result<Observable> {
        self.space.check_same(f.space())?;
        let values = self
            .probs
            .chunks(self.n)
            .map(|r| r.iter().zip(f.values()).map(|(p, v)| p * v).sum())
            .collect();
        Ok(Observable {
            space: self.space.clone(),
            values,
        })
    }

    pub fn apply_to_measure(&self, p: &FiniteMeasure) -> Result<FiniteMeasure> {
        self.space.check_same(p.space())?;
        let mut weights = vec![0.0; self.n];
        for (r, &w) in self.probs.chunks(self.n).zip(p.weights()) {
            for (acc, &pij) in weights.iter_mut().zip(r) {
                *acc += w * pij;
            }
        }
        Ok(FiniteMeasure::from_raw(self.space.clone(), weights))
    }

    /// `self ∘ other`: first step with `self`, then with `other`.
    pub fn compose(&self, other: &MarkovKernel) -> Result<MarkovKernel> {
        self.space.check_same(other.space())?;
        let n = self.n;
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    probs[i * n + j] += a * other.get(k, j);
                }
            }
        }
        let out = MarkovKernel::from_raw(self.space.clone(), probs);
        debug_assert!(
            out.row_sum_defect() <= self.row_sum_defect() + other.row_sum_defect() + INTERNAL_TOL
        );
        Ok(out)
    }

    /// The `m`-fold composition; `power(0)` is the identity.
    pub fn power(&self, m: u32) -> MarkovKernel {
        let mut acc = MarkovKernel::identity(self.space.clone());
        for _ in 0..m {
            acc = acc.compose(self).expect("same space");
        }
        acc
    }

    /// When every row has an entry within `tol` of 1, returns the point map
    /// `i ↦ argmax_j P(i,j)`.
    pub fn is_deterministic(&self, tol: f64) -> Option<Vec<usize>> {
        self.probs
            .chunks(self.n)
            .map(|r| r.iter().position(|&p| (p - 1.0).abs() <= tol))
            .collect()
    }

    /// True when the kernel is deterministic with an injective point map.
    pub fn is_permutation(&self, tol: f64) -> bool {
        match self.is_deterministic(tol) {
            Some(map) => {
                let mut hit = vec![false; self.n];
                map.iter().all(|&j| !std::mem::replace(&mut hit[j], true))
            }
            None => false,
        }
    }
}
