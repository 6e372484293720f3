#![allow(dead_code)]

use mkflow::{MarkovKernel, StateSpace};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Rows drawn from the flat Dirichlet distribution.
pub fn random_kernel<R: Rng>(rng: &mut R, n: usize) -> MarkovKernel {
    let rows = (0..n)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = g.iter().sum();
            g.iter().map(|v| v / total).collect()
        })
        .collect();
    MarkovKernel::new(StateSpace::numbered(n).unwrap(), rows).unwrap()
}

pub fn random_point_map<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

pub fn random_deterministic_kernel<R: Rng>(rng: &mut R, n: usize) -> MarkovKernel {
    let map = random_point_map(rng, n);
    MarkovKernel::from_point_map(StateSpace::numbered(n).unwrap(), &map).unwrap()
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

/// Brute-force homomorphism defect over every sign vector, both signs,
/// computed through the kernel's action on observables.
pub fn brute_force_defect(k: &MarkovKernel) -> f64 {
    let n = k.size();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        let f: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let f2: Vec<f64> = f.iter().map(|v| v * v).collect();
        let obs = mkflow::Observable::new(k.space().clone(), f).unwrap();
        let sq = mkflow::Observable::new(k.space().clone(), f2).unwrap();
        let lf = k.apply_to_observable(&obs).unwrap();
        let lf2 = k.apply_to_observable(&sq).unwrap();
        for x in 0..n {
            best = best.max(lf2.values()[x] - lf.values()[x].powi(2));
        }
    }
    best
}
