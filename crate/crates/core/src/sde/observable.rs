//! Named test functions `h: ℝⁿ → ℝ` with their derivatives.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `x_i`
    Coord { index: usize },
    /// `x_i²`
    CoordSquared { index: usize },
    /// `cos(θ·x)`
    Cos { theta: Vec<f64> },
    /// `sin(θ·x)`
    Sin { theta: Vec<f64> },
    /// Indicator of the box `[lo, hi]`; has no derivatives.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl TestFunction {
    pub fn check_dim(&self, n: usize) -> Result<()> {
        let ok = match self {
            TestFunction::Coord { index } | TestFunction::CoordSquared { index } => *index < n,
            TestFunction::Cos { theta } | TestFunction::Sin { theta } => theta.len() == n,
            TestFunction::Box { lo, hi } => lo.len() == n && hi.len() == n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "observable {self} does not fit a {n}-dimensional state"
            )))
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Coord { index } => x[*index],
            TestFunction::CoordSquared { index } => x[*index] * x[*index],
            TestFunction::Cos { theta } => dot(theta, x).cos(),
            TestFunction::Sin { theta } => dot(theta, x).sin(),
            TestFunction::Box { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(v, (l, h))| l <= v && v <= h);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Gradient and row-major Hessian at `x`, when registered.
    pub fn derivatives(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = x.len();
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        match self {
            TestFunction::Coord { index } => grad[*index] = 1.0,
            TestFunction::CoordSquared { index } => {
                grad[*index] = 2.0 * x[*index];
                hess[index * n + index] = 2.0;
            }
            TestFunction::Cos { theta } | TestFunction::Sin { theta } => {
                let phase = dot(theta, x);
                // d/dx cos = −sin·θ, d²/dx² cos = −cos·θθᵀ; likewise for sin
                let (first, second) = match self {
                    TestFunction::Cos { .. } => (-phase.sin(), -phase.cos()),
                    _ => (phase.cos(), -phase.sin()),
                };
                for i in 0..n {
                    grad[i] = first * theta[i];
                    for j in 0..n {
                        hess[i * n + j] = second * theta[i] * theta[j];
                    }
                }
            }
            TestFunction::Box { .. } => return Err(Error::NoDerivatives(self.to_string())),
        }
        Ok((grad, hess))
    }
}

fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{p:?}: {e}")))
        })
        .collect()
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Coord { index } => write!(f, "x:{index}"),
            TestFunction::CoordSquared { index } => write!(f, "x2:{index}"),
            TestFunction::Cos { theta } => write!(f, "cos:{}", fmt_vec(theta)),
            TestFunction::Sin { theta } => write!(f, "sin:{}", fmt_vec(theta)),
            TestFunction::Box { lo, hi } => write!(f, "box:{};{}", fmt_vec(lo), fmt_vec(hi)),
        }
    }
}

/// Parses `x`, `x:i`, `x2`, `x2:i`, `cos:θ₁,…`, `sin:θ₁,…`,
/// `box:lo₁,…;hi₁,…`.
impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let index = |arg: Option<&str>| -> Result<usize> {
            arg.map_or(Ok(0), |a| {
                a.trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("component {a:?}: {e}")))
            })
        };
        let missing = || Error::Parse(format!("observable {kind:?} needs an argument"));
        match kind {
            "x" => Ok(TestFunction::Coord { index: index(arg)? }),
            "x2" => Ok(TestFunction::CoordSquared { index: index(arg)? }),
            "cos" => Ok(TestFunction::Cos {
                theta: parse_vec(arg.ok_or_else(missing)?)?,
            }),
            "sin" => Ok(TestFunction::Sin {
                theta: parse_vec(arg.ok_or_else(missing)?)?,
            }),
            "box" => {
                let (lo, hi) = arg
                    .ok_or_else(missing)?
                    .split_once(';')
                    .ok_or_else(|| Error::Parse("box needs lo;hi".into()))?;
                Ok(TestFunction::Box {
                    lo: parse_vec(lo)?,
                    hi: parse_vec(hi)?,
                })
            }
            _ => Err(Error::Parse(format!("unknown observable {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in ["x:0", "x2:1", "cos:1,0.5", "sin:2", "box:-1,0;1,2"] {
            let f: TestFunction = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
            assert_eq!(f.to_string().parse::<TestFunction>().unwrap(), f);
        }
        assert_eq!(
            "x".parse::<TestFunction>().unwrap(),
            TestFunction::Coord { index: 0 }
        );
        assert!("cos".parse::<TestFunction>().is_err());
        assert!("tan:1".parse::<TestFunction>().is_err());
        assert!("box:1,2".parse::<TestFunction>().is_err());
    }

    #[test]
    fn derivatives_match_central_differences() {
        let x = [0.3, -0.7];
        let fns: Vec<TestFunction> = ["x:1", "x2:0", "cos:1.5,-0.5", "sin:0.2,2"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let h = 1e-4;
        for f in &fns {
            let (grad, hess) = f.derivatives(&x).unwrap();
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let g = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
                assert!((g - grad[i]).abs() < 1e-7, "{f} grad {i}");
                for j in 0..2 {
                    let e = |di: f64, dj: f64| {
                        let mut y = x;
                        y[i] += di;
                        y[j] += dj;
                        f.eval(&y)
                    };
                    let second = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
                    assert!((second - hess[i * 2 + j]).abs() < 1e-5, "{f} hess {i}{j}");
                }
            }
        }
    }

    #[test]
    fn box_indicator_has_no_derivatives() {
        let b: TestFunction = "box:0;1".parse().unwrap();
        assert_eq!(b.eval(&[0.5]), 1.0);
        assert_eq!(b.eval(&[1.5]), 0.0);
        assert!(matches!(
            b.derivatives(&[0.5]),
            Err(Error::NoDerivatives(_))
        ));
        assert!(b.check_dim(2).is_err());
    }
}
