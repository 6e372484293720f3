use mkflow::io::flow_to_csv;
use mkflow::rng::{stream_rng, sub_seed};
use mkflow::sde::{
    apply_generator, chapman_kolmogorov_check, cocycle_check, estimate_semigroup, euler_flow,
    generator_consistency_check, grid_steps, sample_path, shifted_integral_check, ExplosionPolicy,
    Integrand, Sde, SdeSpec, TestFunction,
};
use serde_json::{json, Value};

use crate::args::{IntegrandKind, SdeArgs, SdeCheckKind};
use crate::error::CliError;
use crate::report::{Report, Status};

/// Seed role for drawing a random elementary integrand.
const INTEGRAND_ROLE: u64 = 4;

struct Setup {
    sde: SdeSpec,
    x: Vec<f64>,
    observable: TestFunction,
    policy: ExplosionPolicy,
    inputs: Value,
}

fn setup(a: &SdeArgs) -> Result<Setup, CliError> {
    let text = match a.params.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.into(),
            source,
        })?,
        None => a.params.clone(),
    };
    let params: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("--params is not valid JSON: {e}")))?;
    let sde = SdeSpec::from_registry(&a.model, &params)?;
    if a.x.len() != sde.dim_state() {
        return Err(CliError::Usage(format!(
            "--x has {} components, model {} needs {}",
            a.x.len(),
            a.model,
            sde.dim_state()
        )));
    }
    let observable: TestFunction = a.observable.parse()?;
    observable.check_dim(a.x.len())?;
    let policy = if a.allow_explosions {
        ExplosionPolicy::Exclude
    } else {
        ExplosionPolicy::Abort
    };
    let inputs = json!({
        "model": sde,
        "x": a.x,
        "t": a.t,
        "dt": a.dt,
        "observable": observable.to_string(),
        "allow_explosions": a.allow_explosions,
    });
    Ok(Setup {
        sde,
        x: a.x.clone(),
        observable,
        policy,
        inputs,
    })
}

pub fn flow(a: &SdeArgs, seed: u64) -> Result<Report, CliError> {
    if a.check.is_some() {
        return check(a, seed);
    }
    let s = setup(a)?;
    let steps = grid_steps(a.t, a.dt)?;
    let w = sample_path(s.sde.dim_noise(), a.dt, steps.max(1), seed)?;
    let result = euler_flow(&s.sde, &s.x, &w, steps)?;
    Ok(Report::new(
        "sde-flow",
        s.inputs,
        json!({
            "steps": steps,
            "terminal": result.terminal(),
            "trajectory": result,
        }),
        Status::Pass,
    )
    .with_csv(flow_to_csv(&result)))
}

/// `E[h(X_t)]` in closed form where the model admits one.
fn oracle(sde: &SdeSpec, h: &TestFunction, x: &[f64], t: f64) -> Option<f64> {
    match (sde, h) {
        (SdeSpec::Ou { lambda, .. }, TestFunction::Coord { index }) => {
            Some(x[*index] * (-lambda[*index] * t).exp())
        }
        (SdeSpec::Ou { lambda, sigma }, TestFunction::CoordSquared { index }) => {
            let i = *index;
            let l = lambda[i];
            let noise: f64 = sigma[i].iter().map(|v| v * v).sum();
            let decay = (-2.0 * l * t).exp();
            let spread = if l == 0.0 {
                t
            } else {
                (1.0 - decay) / (2.0 * l)
            };
            Some(x[i] * x[i] * decay + noise * spread)
        }
        (SdeSpec::Gbm1d { a, .. }, TestFunction::Coord { .. }) => Some(x[0] * (a * t).exp()),
        (SdeSpec::Gbm1d { a, b }, TestFunction::CoordSquared { .. }) => {
            Some(x[0] * x[0] * ((2.0 * a + b * b) * t).exp())
        }
        _ => None,
    }
}

pub fn semigroup(a: &SdeArgs, seed: u64) -> Result<Report, CliError> {
    let s = setup(a)?;
    let mut inputs = s.inputs;
    inputs["samples"] = json!(a.samples);
    let est = estimate_semigroup(
        &s.sde,
        &s.observable,
        &s.x,
        a.t,
        a.dt,
        a.samples,
        seed,
        s.policy,
    )?;
    let exact = oracle(&s.sde, &s.observable, &s.x, a.t);
    // Monte Carlo noise plus an allowance for the first-order Euler bias
    let band = 4.0 * est.std_error + 5.0 * a.dt;
    let status = match exact {
        Some(v) => Status::from_check((est.mean - v).abs() <= band),
        None => Status::Pass,
    };
    let csv = format!(
        "t,mean,std_error,samples,exploded\n{},{},{},{},{}\n",
        est.t, est.mean, est.std_error, est.samples, est.exploded
    );
    Ok(Report::new(
        "sde-semigroup",
        inputs,
        json!({
            "estimate": est,
            "oracle": exact,
            "tolerance": exact.map(|_| band),
        }),
        status,
    )
    .with_csv(csv))
}

pub fn check(a: &SdeArgs, seed: u64) -> Result<Report, CliError> {
    let kind = a
        .check
        .ok_or_else(|| CliError::Usage("sde-check needs --check".into()))?;
    if kind == SdeCheckKind::Semigroup {
        return semigroup(a, seed);
    }
    let s = setup(a)?;
    let mut inputs = s.inputs;
    let (name, outputs, status) = match kind {
        SdeCheckKind::Cocycle | SdeCheckKind::ShiftedIntegral => {
            let steps = grid_steps(a.t, a.dt)?;
            let split = match a.s {
                Some(v) => grid_steps(v, a.dt)?,
                None => steps / 2,
            };
            if split > steps {
                return Err(CliError::Usage(format!("split time {:?} exceeds --t", a.s)));
            }
            inputs["split_step"] = json!(split);
            let w = sample_path(s.sde.dim_noise(), a.dt, steps.max(1), seed)?;
            if kind == SdeCheckKind::Cocycle {
                let r = cocycle_check(&s.sde, &s.x, &w, split, steps - split)?;
                let passed = r.passed();
                ("cocycle", json!(r), Status::from_check(passed))
            } else {
                let h = match a.integrand {
                    IntegrandKind::One => Integrand::One,
                    IntegrandKind::Path => Integrand::Path,
                    IntegrandKind::Elementary => {
                        let mut rng = stream_rng(sub_seed(seed, INTEGRAND_ROLE), 0);
                        Integrand::random_elementary(&mut rng, w.steps() - split, 5)
                    }
                };
                let r = shifted_integral_check(&h, &w, split)?;
                let passed = r.bitwise_equal;
                (
                    "shifted-integral",
                    json!({ "integrand": h, "report": r }),
                    Status::from_check(passed),
                )
            }
        }
        SdeCheckKind::Chapman => {
            let inner_t = a.s.unwrap_or(a.t);
            inputs["s"] = json!(inner_t);
            inputs["outer"] = json!(a.outer);
            inputs["inner"] = json!(a.inner);
            let r = chapman_kolmogorov_check(
                &s.sde,
                &s.observable,
                &s.x,
                inner_t,
                a.t,
                a.dt,
                a.outer,
                a.inner,
                seed,
                s.policy,
            )?;
            let exact = oracle(&s.sde, &s.observable, &s.x, inner_t + a.t);
            let status = r.status.into();
            ("chapman", json!({ "report": r, "oracle": exact }), status)
        }
        SdeCheckKind::Generator => {
            inputs["samples"] = json!(a.samples);
            inputs["horizons"] = json!(a.horizons);
            let r = generator_consistency_check(
                &s.sde,
                &s.observable,
                &s.x,
                a.dt,
                a.samples,
                seed,
                &a.horizons,
                s.policy,
            )?;
            let status: Status = r.status.into();
            let mut out = json!({
                "report": r,
                "generator": apply_generator(&s.sde, &s.observable, &s.x)?,
            });
            if status == Status::Inconclusive {
                out["recommendation"] =
                    json!("Monte Carlo error dominates the signal; raise --samples");
            }
            ("generator", out, status)
        }
        SdeCheckKind::Semigroup => unreachable!("handled above"),
    };
    inputs["check"] = json!(name);
    Ok(Report::new("sde-check", inputs, outputs, status))
}
