use std::path::Path;

use mkflow::dilation::{self as dil, ProductDynamicalSystem};
use mkflow::io::{kernel_to_csv, kernel_to_document, read_kernel, read_system, system_to_document};
use mkflow::markov::INTERNAL_TOL;
use mkflow::randomness;
use mkflow::{InteractionChain, MarkovKernel};
use serde_json::{json, Value};

use crate::args::{
    ChainMode, DilateArgs, DilateInvertibleArgs, IterateArgs, KernelInput, SystemInput,
};
use crate::error::CliError;
use crate::report::{Report, Status};

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn reduce(a: &SystemInput) -> Result<Report, CliError> {
    let sys = read_system(&a.system)?;
    let k = sys.reduce();
    Ok(Report::new(
        "reduce",
        json!({ "system": path_str(&a.system) }),
        json!({ "kernel": kernel_to_document(&k) }),
        Status::Pass,
    )
    .with_csv(kernel_to_csv(&k)))
}

pub fn dilate(a: &DilateArgs) -> Result<Report, CliError> {
    let k = read_kernel(&a.kernel)?;
    let sys = dil::dilate(&k, a.env_cap)?;
    let err = sys.reduce().max_abs_diff(&k);
    Ok(Report::new(
        "dilate",
        json!({ "kernel": path_str(&a.kernel), "env_cap": a.env_cap.to_string() }),
        json!({
            "system": system_to_document(&sys),
            "env_size": sys.env().size(),
            "reduce_max_error": err,
        }),
        Status::from_check(err <= INTERNAL_TOL),
    ))
}

pub fn dilate_invertible(a: &DilateInvertibleArgs) -> Result<Report, CliError> {
    let k = read_kernel(&a.kernel)?;
    let sys = dil::dilate_invertible(&k, a.x0, a.env_cap)?;
    let err = sys.reduce().max_abs_diff(&k);
    let bijective = sys.is_bijective();
    Ok(Report::new(
        "dilate-invertible",
        json!({
            "kernel": path_str(&a.kernel),
            "x0": a.x0,
            "env_cap": a.env_cap.to_string(),
        }),
        json!({
            "system": system_to_document(&sys),
            "env_size": sys.env().size(),
            "bijective": bijective,
            "reduce_max_error": err,
        }),
        Status::from_check(bijective && err <= INTERNAL_TOL),
    ))
}

fn base_system(a: &IterateArgs) -> Result<(ProductDynamicalSystem, Value), CliError> {
    match (&a.kernel, &a.system) {
        (Some(k), None) => Ok((
            dil::dilate(&read_kernel(k)?, a.env_cap)?,
            json!({ "kernel": path_str(k) }),
        )),
        (None, Some(s)) => Ok((read_system(s)?, json!({ "system": path_str(s) }))),
        _ => Err(CliError::Usage(
            "give exactly one of --kernel or --system".into(),
        )),
    }
}

pub fn iterate(a: &IterateArgs, seed: u64) -> Result<Report, CliError> {
    let (base, mut inputs) = base_system(a)?;
    if let Some(m) = a.m {
        inputs["m"] = json!(m);
        let iterated = base.iterate(m)?;
        let reduced = iterated.reduce();
        let power = base.reduce().power(exponent(m)?);
        let gap = reduced.max_abs_diff(&power);
        return Ok(Report::new(
            "iterate",
            inputs,
            json!({
                "system": system_to_document(&iterated),
                "kernel": kernel_to_document(&reduced),
                "reduced_power": kernel_to_document(&power),
                "max_gap_to_power": gap,
                "matches_power": gap <= INTERNAL_TOL,
            }),
            Status::Pass,
        )
        .with_csv(kernel_to_csv(&reduced)));
    }
    let (x, n) = match (a.x, a.n) {
        (Some(x), Some(n)) => (x, n),
        _ => return Err(CliError::Usage("iterate needs --m, or --x with --n".into())),
    };
    inputs["x"] = json!(x);
    inputs["n"] = json!(n);
    inputs["mode"] = json!(match a.mode {
        ChainMode::Exact => "exact",
        ChainMode::Mc => "mc",
    });
    let power = base.reduce().power(exponent(n)?);
    let chain = InteractionChain::new(base, n.max(1))?;
    let states = chain.base().states().clone();
    let reference = power.row(x).to_vec();
    let (distribution, std_errors, counts, passed) = match a.mode {
        ChainMode::Exact => {
            inputs["exact_cap"] = json!(a.exact_cap.to_string());
            let law = chain.reduce_n_exact(x, n, a.exact_cap)?;
            let passed = max_gap(law.weights(), &reference) <= INTERNAL_TOL;
            (law.weights().to_vec(), None, None, passed)
        }
        ChainMode::Mc => {
            inputs["samples"] = json!(a.samples);
            let mc = chain.reduce_n_monte_carlo(x, n, a.samples, seed)?;
            let w = mc.distribution.weights().to_vec();
            // an empty or full cell has a zero empirical error; fall back to
            // the error implied by the exact probability
            let passed = w
                .iter()
                .zip(&reference)
                .zip(&mc.std_errors)
                .all(|((p_hat, p), se)| {
                    let se_true = (p * (1.0 - p) / a.samples as f64).sqrt();
                    (p_hat - p).abs() <= 4.0 * se.max(se_true)
                });
            (w, Some(mc.std_errors), Some(mc.counts), passed)
        }
    };
    let gap = max_gap(&distribution, &reference);
    let mut csv = String::from("state,probability,std_error,power\n");
    for (i, label) in states.labels().iter().enumerate() {
        let se = std_errors
            .as_ref()
            .map_or(String::new(), |s| s[i].to_string());
        csv.push_str(&format!(
            "{label},{},{se},{}\n",
            distribution[i], reference[i]
        ));
    }
    Ok(Report::new(
        "iterate",
        inputs,
        json!({
            "states": states.labels(),
            "distribution": distribution,
            "std_errors": std_errors,
            "counts": counts,
            "power_row": reference,
            "max_gap_to_power": gap,
        }),
        Status::from_check(passed),
    )
    .with_csv(csv))
}

fn exponent(m: usize) -> Result<u32, CliError> {
    u32::try_from(m).map_err(|_| CliError::Usage(format!("{m} steps is too many")))
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn kernel_inputs(a: &KernelInput) -> Result<(MarkovKernel, Value), CliError> {
    Ok((
        read_kernel(&a.kernel)?,
        json!({ "kernel": path_str(&a.kernel), "tol": a.tol }),
    ))
}

pub fn defect(a: &KernelInput) -> Result<Report, CliError> {
    let (k, inputs) = kernel_inputs(a)?;
    let r = randomness::homomorphism_defect(&k)?;
    Ok(Report::new(
        "defect",
        inputs,
        json!({
            "defect": r.defect,
            "deterministic": r.defect <= a.tol,
            "witness_x": r.witness_x,
            "witness_state": k.space().label(r.witness_x),
            "witness_f": r.witness_f.values(),
        }),
        Status::Pass,
    ))
}

pub fn classify(a: &KernelInput) -> Result<Report, CliError> {
    let (k, inputs) = kernel_inputs(a)?;
    let class = randomness::classify(&k, a.tol);
    Ok(Report::new(
        "classify",
        inputs,
        json!({ "class": class.as_str() }),
        Status::Pass,
    ))
}

pub fn invertible(a: &KernelInput) -> Result<Report, CliError> {
    let (k, inputs) = kernel_inputs(a)?;
    let r = randomness::is_markov_invertible(&k, a.tol);
    Ok(Report::new(
        "invertible",
        inputs,
        json!({
            "invertible": r.invertible,
            "determinant": r.determinant,
            "matrix_inverse": r.matrix_inverse,
            "kernel": r.inverse.as_ref().map(kernel_to_document),
        }),
        Status::Pass,
    ))
}
