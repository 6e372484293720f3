//! Diagnostics that tell deterministic kernels apart from random ones.
//!
//! A kernel is deterministic exactly when its operator is multiplicative,
//! `L(f²) = (Lf)²`. The homomorphism defect measures how far it is from
//! that: the largest one-step conditional variance `L(f²)(x) − (Lf)(x)²`
//! over observables with `sup |f| ≤ 1`. For fixed `x` the variance is convex
//! in `f`, so the maximum sits at an extreme point of the cube, i.e. a sign
//! vector.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::{MarkovKernel, Observable};

/// Largest state space searched exhaustively (`2^(n-1)` sign vectors).
pub const DEFECT_MAX_STATES: usize = 20;

/// Default tolerance for determinism and invertibility decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Matrices with `|det|` below this are treated as singular.
const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub defect: f64,
    pub witness_f: Observable,
    pub witness_x: usize,
}

/// Exhaustive homomorphism defect over sign vectors.
///
/// `f` and `−f` have equal variance, so only vectors with `f(x₁) = +1` are
/// visited, in increasing order of the bitmask whose set bits mark `−1`
/// entries. The witness is the first `(x, f)` in `(x, mask)` order reaching
/// the maximum.
pub fn homomorphism_defect(k: &MarkovKernel) -> Result<DefectReport> {
    let n = k.size();
    if n > DEFECT_MAX_STATES {
        return Err(Error::TooManyStates {
            size: n,
            cap: DEFECT_MAX_STATES,
        });
    }
    let masks = 1u32 << (n - 1);
    let mut best = (f64::NEG_INFINITY, 0usize, 0u32);
    let mut f = vec![0.0; n];
    for x in 0..n {
        let row = k.row(x);
        let second: f64 = row.iter().sum(); // L(f²)(x) with f² ≡ 1
        for mask in 0..masks {
            fill_signs(&mut f, mask);
            let first: f64 = row.iter().zip(&f).map(|(p, v)| p * v).sum();
            let var = second - first * first;
            if var > best.0 {
                best = (var, x, mask);
            }
        }
    }
    fill_signs(&mut f, best.2);
    Ok(DefectReport {
        defect: best.0.max(0.0),
        witness_f: Observable::new(k.space().clone(), f)?,
        witness_x: best.1,
    })
}

fn fill_signs(f: &mut [f64], mask: u32) {
    f[0] = 1.0;
    for (i, v) in f.iter_mut().enumerate().skip(1) {
        *v = if mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 };
    }
}

/// `L(f²) − (Lf)²` pointwise.
pub fn variance_function(k: &MarkovKernel, f: &Observable) -> Result<Observable> {
    let second = k.apply_to_observable(&f.squared())?;
    let first = k.apply_to_observable(f)?;
    let values = second
        .values()
        .iter()
        .zip(first.values())
        .map(|(s, m)| s - m * m)
        .collect();
    Observable::new(k.space().clone(), values)
}

/// Determinism decided through the multiplicativity defect.
pub fn is_deterministic_via_homomorphism(k: &MarkovKernel, tol: f64) -> Result<bool> {
    Ok(homomorphism_defect(k)?.defect <= tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvertibilityReport {
    /// Inverse exists and is itself a Markov kernel.
    pub invertible: bool,
    pub determinant: f64,
    /// The plain matrix inverse whenever the matrix is nonsingular, stochastic
    /// or not.
    pub matrix_inverse: Option<Vec<Vec<f64>>>,
    pub inverse: Option<MarkovKernel>,
}

/// Invertibility in the category of Markov kernels: the matrix inverse must
/// exist and be row-stochastic within `tol`. At finite size this only
/// happens for permutation matrices.
pub fn is_markov_invertible(k: &MarkovKernel, tol: f64) -> InvertibilityReport {
    let n = k.size();
    let flat: Vec<f64> = k.rows().into_iter().flatten().collect();
    let m = DMatrix::from_row_slice(n, n, &flat);
    let determinant = m.determinant();
    let inv = if determinant.abs() < SINGULAR_DET {
        None
    } else {
        m.try_inverse()
    };
    let Some(inv) = inv else {
        return InvertibilityReport {
            invertible: false,
            determinant,
            matrix_inverse: None,
            inverse: None,
        };
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| inv[(i, j)]).collect())
        .collect();
    let stochastic = rows.iter().all(|r| {
        r.iter().all(|&v| v >= -tol && v <= 1.0 + tol) && (r.iter().sum::<f64>() - 1.0).abs() <= tol
    });
    let inverse = if stochastic {
        let cleaned = rows
            .iter()
            .map(|r| r.iter().map(|v| v.clamp(0.0, 1.0)).collect())
            .collect();
        MarkovKernel::new(k.space().clone(), cleaned).ok()
    } else {
        None
    };
    let invertible = inverse.is_some();
    assert!(
        !invertible || k.is_permutation(tol.max(DEFAULT_TOL) * n as f64),
        "stochastic inverse of a non-permutation kernel"
    );
    InvertibilityReport {
        invertible,
        determinant,
        matrix_inverse: Some(rows),
        inverse,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelClass {
    DeterministicInvertible,
    DeterministicNoninvertible,
    Random,
}

impl KernelClass {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelClass::DeterministicInvertible => "deterministic-invertible",
            KernelClass::DeterministicNoninvertible => "deterministic-noninvertible",
            KernelClass::Random => "random",
        }
    }
}

impl std::fmt::Display for KernelClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(k: &MarkovKernel, tol: f64) -> KernelClass {
    let class = if k.is_permutation(tol) {
        KernelClass::DeterministicInvertible
    } else if k.is_deterministic(tol).is_some() {
        KernelClass::DeterministicNoninvertible
    } else {
        KernelClass::Random
    };
    debug_assert!(
        !is_markov_invertible(k, tol).invertible || class == KernelClass::DeterministicInvertible
    );
    class
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::StateSpace;

    fn kernel(rows: Vec<Vec<f64>>) -> MarkovKernel {
        MarkovKernel::from_rows(rows).unwrap()
    }

    #[test]
    fn defect_examples() {
        let det = kernel(vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert_eq!(homomorphism_defect(&det).unwrap().defect, 0.0);

        let l = kernel(vec![vec![0.75, 0.25], vec![0.75, 0.25]]);
        let r = homomorphism_defect(&l).unwrap();
        assert_eq!(r.defect, 0.75);
        assert_eq!(r.witness_f.values(), &[1.0, -1.0]);
        assert_eq!(r.witness_x, 0);

        let u = MarkovKernel::uniform(StateSpace::numbered(2).unwrap());
        let r = homomorphism_defect(&u).unwrap();
        assert_eq!(r.defect, 1.0);
        assert_eq!(r.witness_f.values(), &[1.0, -1.0]);
    }

    #[test]
    fn defect_matches_variance_of_witness() {
        let k = kernel(vec![
            vec![0.1, 0.6, 0.3],
            vec![0.5, 0.25, 0.25],
            vec![0.0, 0.2, 0.8],
        ]);
        let r = homomorphism_defect(&k).unwrap();
        let var = variance_function(&k, &r.witness_f).unwrap();
        assert!((var.values()[r.witness_x] - r.defect).abs() < 1e-15);
        assert!(r.defect > 0.0 && r.defect <= 1.0);
    }

    #[test]
    fn defect_refuses_large_spaces() {
        let k = MarkovKernel::uniform(StateSpace::numbered(21).unwrap());
        assert_eq!(
            homomorphism_defect(&k).unwrap_err(),
            Error::TooManyStates { size: 21, cap: 20 }
        );
    }

    #[test]
    fn determinism_via_homomorphism_examples() {
        assert!(is_deterministic_via_homomorphism(
            &kernel(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
            DEFAULT_TOL
        )
        .unwrap());
        assert!(!is_deterministic_via_homomorphism(
            &kernel(vec![vec![0.75, 0.25], vec![0.75, 0.25]]),
            DEFAULT_TOL
        )
        .unwrap());
        let id = MarkovKernel::identity(StateSpace::numbered(4).unwrap());
        assert!(is_deterministic_via_homomorphism(&id, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn invertibility_examples() {
        let swap = kernel(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let r = is_markov_invertible(&swap, DEFAULT_TOL);
        assert!(r.invertible);
        assert_eq!(r.inverse.unwrap(), swap);

        let bsc = kernel(vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
        let r = is_markov_invertible(&bsc, DEFAULT_TOL);
        assert!(!r.invertible);
        let inv = r.matrix_inverse.unwrap();
        let expected = [[0.9 / 0.8, -0.1 / 0.8], [-0.1 / 0.8, 0.9 / 0.8]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j] - expected[i][j]).abs() < 1e-12);
            }
        }

        let l = kernel(vec![vec![0.75, 0.25], vec![0.75, 0.25]]);
        let r = is_markov_invertible(&l, DEFAULT_TOL);
        assert!(!r.invertible);
        assert!(r.matrix_inverse.is_none());
        assert_eq!(r.determinant, 0.0);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify(&kernel(vec![vec![0.0, 1.0], vec![1.0, 0.0]]), DEFAULT_TOL),
            KernelClass::DeterministicInvertible
        );
        assert_eq!(
            classify(&kernel(vec![vec![1.0, 0.0], vec![1.0, 0.0]]), DEFAULT_TOL),
            KernelClass::DeterministicNoninvertible
        );
        assert_eq!(
            classify(
                &kernel(vec![vec![0.75, 0.25], vec![0.75, 0.25]]),
                DEFAULT_TOL
            ),
            KernelClass::Random
        );
        assert_eq!(KernelClass::Random.to_string(), "random");
    }
}
