use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Value of a result as a function of the total time at which it is
/// delivered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValueFunction {
    /// `k` up to and including time `a`, zero afterwards.
    Deadline { k: f64, a: f64 },
    /// `Σ coeffs[i]·t^i`; `coeffs[0]` is the constant term.
    Polynomial { coeffs: Vec<f64> },
    /// `k·exp(−lambda·t)`.
    Exponential { k: f64, lambda: f64 },
    /// Box of height `k / w` on `(a − w/2, a + w/2]`, a finite-width stand-in
    /// for value concentrated at exactly `a`.
    Target {
        a: f64,
        w: f64,
        #[serde(default = "one")]
        k: f64,
    },
}

impl ValueFunction {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ValueFunction::Deadline { k, a } => *k > 0.0 && *a > 0.0,
            ValueFunction::Polynomial { coeffs } => {
                !coeffs.is_empty() && coeffs.iter().all(|c| c.is_finite())
            }
            ValueFunction::Exponential { k, lambda } => *k > 0.0 && *lambda >= 0.0,
            ValueFunction::Target { w, k, a } => *w > 0.0 && *k > 0.0 && a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid value function {self}"
            )))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ValueFunction::Deadline { k, a } => {
                if t <= *a {
                    *k
                } else {
                    0.0
                }
            }
            ValueFunction::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
            }
            ValueFunction::Exponential { k, lambda } => k * (-lambda * t).exp(),
            ValueFunction::Target { a, w, k } => {
                if a - w / 2.0 < t && t <= a + w / 2.0 {
                    k / w
                } else {
                    0.0
                }
            }
        }
    }

    /// The same preference multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> ValueFunction {
        match self.clone() {
            ValueFunction::Deadline { k, a } => ValueFunction::Deadline { k: k * c, a },
            ValueFunction::Polynomial { coeffs } => ValueFunction::Polynomial {
                coeffs: coeffs.iter().map(|x| x * c).collect(),
            },
            ValueFunction::Exponential { k, lambda } => {
                ValueFunction::Exponential { k: k * c, lambda }
            }
            ValueFunction::Target { a, w, k } => ValueFunction::Target { a, w, k: k * c },
        }
    }

    /// Adds `c` to the constant term of a polynomial; `None` for other kinds.
    pub fn shifted(&self, c: f64) -> Option<ValueFunction> {
        match self {
            ValueFunction::Polynomial { coeffs } => {
                let mut coeffs = coeffs.clone();
                coeffs[0] += c;
                Some(ValueFunction::Polynomial { coeffs })
            }
            _ => None,
        }
    }
}

impl fmt::Display for ValueFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueFunction::Deadline { k, a } => write!(f, "deadline:k={k},a={a}"),
            ValueFunction::Polynomial { coeffs } => {
                f.write_str("poly:")?;
                for (i, c) in coeffs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            ValueFunction::Exponential { k, lambda } => write!(f, "exp:k={k},lambda={lambda}"),
            ValueFunction::Target { a, w, k } => write!(f, "target:a={a},w={w},k={k}"),
        }
    }
}

/// Parses the compact forms `deadline:k=1,a=5`, `poly:c0,c1,...`,
/// `exp:k=1,lambda=0.1` and `target:a=10,w=0.5[,k=1]`.
impl FromStr for ValueFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |m: &str| Error::Parse(format!("value function `{s}`: {m}"));
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| err("expected `kind:params`"))?;
        let number = |x: &str| x.trim().parse::<f64>().map_err(|_| err("bad number"));
        let named = |name: &str| -> Result<Option<f64>> {
            for part in rest.split(',') {
                if let Some((key, val)) = part.split_once('=') {
                    if key.trim() == name {
                        return number(val).map(Some);
                    }
                } else {
                    return Err(err("expected key=value"));
                }
            }
            Ok(None)
        };
        let required = |name: &str| named(name)?.ok_or_else(|| err(&format!("missing `{name}`")));
        let vf = match kind.trim() {
            "deadline" => ValueFunction::Deadline {
                k: required("k")?,
                a: required("a")?,
            },
            "poly" | "polynomial" => ValueFunction::Polynomial {
                coeffs: rest.split(',').map(number).collect::<Result<_>>()?,
            },
            "exp" | "exponential" => ValueFunction::Exponential {
                k: required("k")?,
                lambda: required("lambda")?,
            },
            "target" => ValueFunction::Target {
                a: required("a")?,
                w: required("w")?,
                k: named("k")?.unwrap_or(1.0),
            },
            other => return Err(err(&format!("unknown kind `{other}`"))),
        };
        vf.validate()?;
        Ok(vf)
    }
}
