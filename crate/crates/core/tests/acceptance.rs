//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`).

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use mkflow::dilation::{dilate, dilate_invertible, DEFAULT_ENV_CAP};
use mkflow::interactions::DEFAULT_EXACT_CAP;
use mkflow::randomness::{
    homomorphism_defect, is_deterministic_via_homomorphism, is_markov_invertible, DEFAULT_TOL,
};
use mkflow::rng::stream_rng;
use mkflow::sde::{
    apply_generator, chapman_kolmogorov_check, cocycle_check, estimate_semigroup_many,
    generator_consistency_check, sample_path, shifted_integral_check, CheckStatus, ExplosionPolicy,
    Integrand, SdeSpec, TestFunction, REGISTRY,
};
use mkflow::{InteractionChain, MarkovKernel, ProductDynamicalSystem};
use rand::Rng;
use serde_json::json;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || {
        format!("took {:.2?}, budget {budget:.0?}", elapsed)
    })
}

fn rotation_regression() -> Outcome {
    let start = Instant::now();
    let sys = ProductDynamicalSystem::rotation([0.25, 0.75]).map_err(|e| e.to_string())?;
    let l = sys.reduce();
    let expected_l = vec![vec![0.75, 0.25], vec![0.75, 0.25]];
    let d1 = max_diff(&l.rows(), &expected_l);
    ensure(d1 <= 1e-12, || format!("reduce = {:?}", l.rows()))?;
    let squared = sys.iterate(2).map_err(|e| e.to_string())?.reduce();
    let d2 = max_diff(&squared.rows(), &[vec![0.0, 1.0], vec![1.0, 0.0]]);
    ensure(d2 <= 1e-12, || format!("reduce(T²) = {:?}", squared.rows()))?;
    let l2 = l.power(2);
    ensure(l2.max_abs_diff(&l) <= 1e-12, || {
        format!("L² = {:?}", l2.rows())
    })?;
    let apart = squared.max_abs_diff(&l2);
    ensure(apart > 1e-12, || "reduce(T²) coincides with L²".into())?;
    within_budget(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "max err {:.1e}, |reduce(T²) − L²| = {apart}",
        d1.max(d2)
    ))
}

fn dilation_round_trip() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(1001, 0);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let n = 2 + i % 3;
        let k = random_kernel(&mut rng, n);
        let sys = dilate(&k, DEFAULT_ENV_CAP).map_err(|e| e.to_string())?;
        let err = sys.reduce().max_abs_diff(&k);
        let mass = (sys.env().weights().iter().sum::<f64>() - 1.0).abs();
        ensure(err <= 1e-12 && mass <= 1e-12, || {
            format!("kernel {i}: reduce err {err}, μ mass err {mass}")
        })?;
        worst = worst.max(err).max(mass);
    }
    within_budget(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("500 kernels, max err {worst:.1e}"))
}

/// Enumerates `(x, y) ↦ T(x, y)` and checks it hits every pair once.
fn is_bijection_by_enumeration(sys: &ProductDynamicalSystem) -> bool {
    let (n, m) = (sys.states().size(), sys.env().size());
    let images: HashSet<(usize, usize)> = (0..n)
        .flat_map(|x| (0..m).map(move |y| (x, y)))
        .map(|(x, y)| sys.step(x, y))
        .collect();
    images.len() == n * m && images.iter().all(|&(x, y)| x < n && y < m)
}

fn invertible_dilation() -> Outcome {
    let mut rng = stream_rng(1002, 0);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = 2 + i % 2;
        let k = random_kernel(&mut rng, n);
        let x0 = rng.random_range(0..n);
        let sys = dilate_invertible(&k, x0, DEFAULT_ENV_CAP).map_err(|e| e.to_string())?;
        ensure(
            sys.is_bijective() && is_bijection_by_enumeration(&sys),
            || format!("kernel {i}: not a bijection"),
        )?;
        let err = sys.reduce().max_abs_diff(&k);
        ensure(err <= 1e-12, || format!("kernel {i}: reduce err {err}"))?;
        worst = worst.max(err);
    }
    Ok(format!("100 bijections, max reduce err {worst:.1e}"))
}

fn semigroup_dilation() -> Outcome {
    let mut rng = stream_rng(1003, 0);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = rng.random_range(1..=3);
        let steps = rng.random_range(1..=4u32);
        let k = random_kernel(&mut rng, n);
        let chain =
            InteractionChain::from_kernel(&k, 4, DEFAULT_ENV_CAP).map_err(|e| e.to_string())?;
        let reference = k.power(steps);
        for x in 0..n {
            let law = chain
                .reduce_n_exact(x, steps as usize, DEFAULT_EXACT_CAP)
                .map_err(|e| e.to_string())?;
            let err = law
                .weights()
                .iter()
                .zip(reference.row(x))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ensure(err <= 1e-12, || format!("case {i}, x = {x}: err {err}"))?;
            worst = worst.max(err);
        }
    }
    let samples = 100_000u64;
    let mut worst_z: f64 = 0.0;
    for i in 0..20 {
        let n = rng.random_range(2..=3);
        let steps = rng.random_range(1..=4usize);
        let x = rng.random_range(0..n);
        let k = random_kernel(&mut rng, n);
        let chain =
            InteractionChain::from_kernel(&k, 4, DEFAULT_ENV_CAP).map_err(|e| e.to_string())?;
        let exact = k.power(steps as u32);
        let mc = chain
            .reduce_n_monte_carlo(x, steps, samples, 2000 + i)
            .map_err(|e| e.to_string())?;
        for (j, (&p_hat, &p)) in mc
            .distribution
            .weights()
            .iter()
            .zip(exact.row(x))
            .enumerate()
        {
            // the exact standard error guards against a degenerate zero estimate
            let se_true = (p * (1.0 - p) / samples as f64).sqrt();
            let se = mc.std_errors[j].max(se_true);
            let gap = (p_hat - p).abs();
            ensure(gap <= 4.0 * se, || {
                format!("MC case {i}, state {j}: {p_hat} vs {p} (se {se:.2e})")
            })?;
            if se > 0.0 {
                worst_z = worst_z.max(gap / se);
            }
        }
    }
    Ok(format!(
        "exact max err {worst:.1e}; 20 MC cases, max |z| = {worst_z:.2}"
    ))
}

fn determinism_characterization() -> Outcome {
    let mut rng = stream_rng(1005, 0);
    let mut deterministic = 0;
    for i in 0..400 {
        let n = rng.random_range(1..=6);
        let k = if i % 2 == 0 {
            random_deterministic_kernel(&mut rng, n)
        } else {
            random_kernel(&mut rng, n)
        };
        let direct = k.is_deterministic(DEFAULT_TOL).is_some();
        let algebraic =
            is_deterministic_via_homomorphism(&k, DEFAULT_TOL).map_err(|e| e.to_string())?;
        ensure(direct == algebraic, || {
            format!("kernel {i}: {:?}", k.rows())
        })?;
        deterministic += direct as usize;
    }
    let l = MarkovKernel::from_rows(vec![vec![0.75, 0.25], vec![0.75, 0.25]]).unwrap();
    let defect = homomorphism_defect(&l).map_err(|e| e.to_string())?.defect;
    let oracle = brute_force_defect(&l);
    ensure(
        (defect - 0.75).abs() <= 1e-12 && (oracle - 0.75).abs() <= 1e-12,
        || format!("defect {defect}, brute force {oracle}"),
    )?;
    Ok(format!(
        "400 kernels agree ({deterministic} deterministic); defect(L) = {defect}"
    ))
}

fn invertibility_theorem() -> Outcome {
    let mut rng = stream_rng(1006, 0);
    let mut accepted = 0;
    for i in 0..300 {
        let n = rng.random_range(1..=5);
        let k = match i % 3 {
            0 => random_kernel(&mut rng, n),
            1 => random_deterministic_kernel(&mut rng, n),
            _ => MarkovKernel::from_point_map(
                mkflow::StateSpace::numbered(n).unwrap(),
                &random_permutation(&mut rng, n),
            )
            .unwrap(),
        };
        if is_markov_invertible(&k, DEFAULT_TOL).invertible {
            accepted += 1;
            ensure(
                k.is_deterministic(DEFAULT_TOL).is_some() && k.is_permutation(DEFAULT_TOL),
                || format!("kernel {i} accepted but not a permutation: {:?}", k.rows()),
            )?;
        }
    }
    let k = MarkovKernel::from_rows(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
    let report = is_markov_invertible(&k, DEFAULT_TOL);
    ensure(!report.invertible, || {
        "[[0.9,0.1],[0.1,0.9]] accepted".into()
    })?;
    let inverse = report.matrix_inverse.ok_or("no matrix inverse reported")?;
    // 2×2 adjugate over the determinant 0.8
    let oracle = vec![vec![1.125, -0.125], vec![-0.125, 1.125]];
    let err = max_diff(&inverse, &oracle);
    ensure(err <= 1e-12, || format!("reported inverse {inverse:?}"))?;
    Ok(format!(
        "{accepted}/300 accepted, all permutations; rejected inverse {inverse:?}"
    ))
}

fn registry_models() -> Vec<(SdeSpec, usize, usize)> {
    let params = [
        json!({"lambda": [1.0, 2.0], "sigma": [[1.0, 0.2], [0.0, 0.7]]}),
        json!({"a": [[-1.0, 0.3], [0.2, -0.8]], "b": [0.5, -0.1], "c": [[0.4], [0.9]]}),
        json!({"a": 0.2, "b": 0.5}),
        json!({"sigma": 0.8}),
    ];
    let dims = [(2, 2), (2, 1), (1, 1), (1, 1)];
    REGISTRY
        .iter()
        .zip(params)
        .zip(dims)
        .map(|((name, p), (n, d))| (SdeSpec::from_registry(name, &p).unwrap(), n, d))
        .collect()
}

fn grid_cocycle() -> Outcome {
    let start = Instant::now();
    let mut rng = stream_rng(1007, 0);
    let mut runs = 0;
    for (sde, n, d) in registry_models() {
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let seed: u64 = rng.random();
            let split = rng.random_range(0..=1000);
            let w = sample_path(d, 1e-3, 1000, seed).map_err(|e| e.to_string())?;
            let r = cocycle_check(&sde, &x, &w, split, 1000 - split).map_err(|e| e.to_string())?;
            ensure(r.terminal_bitwise_equal && r.passed(), || {
                format!(
                    "{} seed {seed} split {split}: {:?} vs {:?}",
                    sde.name(),
                    r.unsplit,
                    r.split
                )
            })?;
            runs += 1;
        }
    }
    within_budget(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{runs} split runs bitwise equal"))
}

fn shifted_integral() -> Outcome {
    let mut rng = stream_rng(1008, 0);
    for i in 0..50 {
        let steps = rng.random_range(10..=500);
        let w = sample_path(rng.random_range(1..=3), 1e-2, steps, rng.random())
            .map_err(|e| e.to_string())?;
        let k_s = rng.random_range(0..steps);
        let h = Integrand::random_elementary(&mut rng, steps - k_s, 6);
        let r = shifted_integral_check(&h, &w, k_s).map_err(|e| e.to_string())?;
        ensure(r.bitwise_equal, || {
            format!(
                "integrand {i}: {} vs {}",
                r.shifted_integral, r.reindexed_integral
            )
        })?;
    }
    Ok("50 elementary integrands bitwise equal".into())
}

fn ou_semigroup() -> Outcome {
    let start = Instant::now();
    let (lambda, sigma, x, t, dt) = (1.0f64, 1.0f64, 1.0f64, 1.0, 1e-3);
    let sde = SdeSpec::ou_1d(lambda, sigma);
    let hs = [
        TestFunction::Coord { index: 0 },
        TestFunction::CoordSquared { index: 0 },
    ];
    let est = estimate_semigroup_many(&sde, &hs, &[x], t, dt, 100_000, 9, ExplosionPolicy::Abort)
        .map_err(|e| e.to_string())?;
    let decay = (-lambda * t).exp();
    let mean = x * decay;
    let second = x * x * decay * decay + sigma * sigma * (1.0 - decay * decay) / (2.0 * lambda);
    let mut parts = Vec::new();
    for (e, oracle, name) in [(&est[0], mean, "x"), (&est[1], second, "x²")] {
        let gap = (e.mean - oracle).abs();
        let band = 4.0 * e.std_error + 5.0 * dt;
        ensure(gap <= band, || {
            format!(
                "P_t[{name}] = {} vs {oracle}, gap {gap:.2e} > {band:.2e}",
                e.mean
            )
        })?;
        parts.push(format!(
            "P_t[{name}] = {:.5} (oracle {oracle:.5}, gap {gap:.1e} ≤ {band:.1e})",
            e.mean
        ));
    }
    within_budget(start.elapsed(), Duration::from_secs(60))?;
    Ok(parts.join("; "))
}

fn chapman_kolmogorov() -> Outcome {
    let h = TestFunction::Coord { index: 0 };
    let cases = [
        ("ou", SdeSpec::ou_1d(1.0, 1.0), (-1.0f64).exp()),
        ("gbm a=0", SdeSpec::gbm_1d(0.0, 0.5), 1.0),
    ];
    let mut parts = Vec::new();
    for (name, sde, oracle) in cases {
        let r = chapman_kolmogorov_check(
            &sde,
            &h,
            &[1.0],
            0.5,
            0.5,
            1e-3,
            10_000,
            10,
            10,
            ExplosionPolicy::Abort,
        )
        .map_err(|e| e.to_string())?;
        ensure(r.status == CheckStatus::Pass, || {
            format!(
                "{name}: nested {} vs direct {}, gap {:.2e} > {:.2e}",
                r.nested, r.direct, r.gap, r.bound
            )
        })?;
        parts.push(format!(
            "{name}: nested {:.4} direct {:.4} (oracle {oracle:.4}), gap {:.1e} ≤ {:.1e}",
            r.nested, r.direct, r.gap, r.bound
        ));
    }
    Ok(parts.join("; "))
}

fn generator_consistency() -> Outcome {
    let (lambda, sigma, x) = (1.0, 1.0, 1.0);
    let sde = SdeSpec::ou_1d(lambda, sigma);
    let h = TestFunction::CoordSquared { index: 0 };
    let generator = apply_generator(&sde, &h, &[x]).map_err(|e| e.to_string())?;
    let oracle = -2.0 * lambda * x * x + sigma * sigma;
    ensure((generator - oracle).abs() <= 1e-12, || {
        format!("Ah(x) = {generator}")
    })?;
    let r = generator_consistency_check(
        &sde,
        &h,
        &[x],
        1e-3,
        100_000,
        11,
        &[0.2, 0.1, 0.05],
        ExplosionPolicy::Abort,
    )
    .map_err(|e| e.to_string())?;
    let quotients: Vec<String> = r
        .quotients
        .iter()
        .map(|q| format!("{:.4}", q.quotient))
        .collect();
    ensure(r.status == CheckStatus::Pass && r.gap_decreasing, || {
        format!(
            "status {:?}, D(t) = [{}], final gap {:.2e}, bound {:.2e}",
            r.status,
            quotients.join(", "),
            r.final_gap,
            r.bound
        )
    })?;
    Ok(format!(
        "D(t) = [{}] → {generator}, final gap {:.1e} ≤ {:.1e}",
        quotients.join(", "),
        r.final_gap,
        r.bound
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("rotation counter-example regression", rotation_regression),
        ("dilation round trip", dilation_round_trip),
        ("invertible dilation", invertible_dilation),
        ("repeated interactions reproduce powers", semigroup_dilation),
        ("determinism characterization", determinism_characterization),
        ("invertibility implies permutation", invertibility_theorem),
        ("exact grid cocycle", grid_cocycle),
        ("shifted integral identity", shifted_integral),
        ("OU semigroup oracle", ou_semigroup),
        ("Chapman-Kolmogorov", chapman_kolmogorov),
        ("generator consistency", generator_consistency),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{elapsed:.2?}]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{elapsed:.2?}]: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
