//! Text specifications of the classifiers a simulation compares.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::weightgen::asymptotics::{k_opt, k_star, q_opt};
use crate::weightgen::{
    bagged_with_weights, bagged_without_weights, geometric_weights, higher_order_weights,
    optimal_weights, uniform_weights, CoefficientPath, WeightVector,
};

/// One classifier in an experiment.
///
/// | text | meaning |
/// |---|---|
/// | `bayes` | the Bayes rule itself (control) |
/// | `optimal`, `optimal:K` | optimal weights at `k*`, or at a fixed `K` |
/// | `uniform_kopt`, `uniform:K` | unweighted k-NN at `k_opt`, or at `K` |
/// | `geometric_qopt`, `geometric:Q` | geometric bagging weights at `q_opt`, or at `Q` |
/// | `bagged_with_qopt`, `bagged_with:M` | bagging with replacement, `m = ⌈q_opt n⌉` or `M` |
/// | `bagged_without_qopt`, `bagged_without:M` | the same without replacement |
/// | `higher_order:R:B0:K` | signed order-`R` weights |
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeSpec {
    Bayes,
    OptimalKStar,
    Optimal(usize),
    UniformKOpt,
    Uniform(usize),
    GeometricQOpt,
    Geometric(f64),
    BaggedWithQOpt,
    BaggedWith(usize),
    BaggedWithoutQOpt,
    BaggedWithout(usize),
    HigherOrder { r: usize, b0: f64, k: usize },
}

impl SchemeSpec {
    /// Whether resolving this scheme needs `B1` and `B2 > 0`.
    pub fn needs_constants(self) -> bool {
        matches!(
            self,
            SchemeSpec::OptimalKStar
                | SchemeSpec::UniformKOpt
                | SchemeSpec::GeometricQOpt
                | SchemeSpec::BaggedWithQOpt
                | SchemeSpec::BaggedWithoutQOpt
        )
    }

    /// Weight vector at sample size `n` in dimension `d`; `None` for the Bayes rule.
    /// `constants` is `(B1, B2)`.
    pub fn resolve(self, n: usize, d: usize, constants: Option<(f64, f64)>) -> Result<Option<WeightVector>> {
        let need = || {
            constants.ok_or_else(|| {
                Error::config(format!("scheme {self} needs B1 and B2 > 0 for this population"))
            })
        };
        let m_of = |q: f64| ((q * n as f64).ceil() as usize).clamp(1, n);
        let w = match self {
            SchemeSpec::Bayes => return Ok(None),
            SchemeSpec::OptimalKStar => {
                let (b1, b2) = need()?;
                optimal_weights(k_star(b1, b2, d, n)?.k, n, d)?
            }
            SchemeSpec::Optimal(k) => optimal_weights(k, n, d)?,
            SchemeSpec::UniformKOpt => {
                let (b1, b2) = need()?;
                uniform_weights(k_opt(b1, b2, d, n)?.k, n)?
            }
            SchemeSpec::Uniform(k) => uniform_weights(k, n)?,
            SchemeSpec::GeometricQOpt => {
                let (b1, b2) = need()?;
                geometric_weights(n, q_opt(b1, b2, d, n)?.q)?
            }
            SchemeSpec::Geometric(q) => geometric_weights(n, q)?,
            SchemeSpec::BaggedWithQOpt => {
                let (b1, b2) = need()?;
                bagged_with_weights(n, m_of(q_opt(b1, b2, d, n)?.q))?
            }
            SchemeSpec::BaggedWith(m) => bagged_with_weights(n, m)?,
            SchemeSpec::BaggedWithoutQOpt => {
                let (b1, b2) = need()?;
                bagged_without_weights(n, m_of(q_opt(b1, b2, d, n)?.q))?
            }
            SchemeSpec::BaggedWithout(m) => bagged_without_weights(n, m)?,
            SchemeSpec::HigherOrder { r, b0, k } => {
                higher_order_weights(r, k, b0, n, d, CoefficientPath::Exact)?
            }
        };
        Ok(Some(w))
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Bayes => write!(f, "bayes"),
            SchemeSpec::OptimalKStar => write!(f, "optimal"),
            SchemeSpec::Optimal(k) => write!(f, "optimal:{k}"),
            SchemeSpec::UniformKOpt => write!(f, "uniform_kopt"),
            SchemeSpec::Uniform(k) => write!(f, "uniform:{k}"),
            SchemeSpec::GeometricQOpt => write!(f, "geometric_qopt"),
            SchemeSpec::Geometric(q) => write!(f, "geometric:{q}"),
            SchemeSpec::BaggedWithQOpt => write!(f, "bagged_with_qopt"),
            SchemeSpec::BaggedWith(m) => write!(f, "bagged_with:{m}"),
            SchemeSpec::BaggedWithoutQOpt => write!(f, "bagged_without_qopt"),
            SchemeSpec::BaggedWithout(m) => write!(f, "bagged_without:{m}"),
            SchemeSpec::HigherOrder { r, b0, k } => write!(f, "higher_order:{r}:{b0}:{k}"),
        }
    }
}

impl Serialize for SchemeSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn arg<T: FromStr>(text: &str, what: &str, spec: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::input(format!("scheme {spec:?}: bad {what} {text:?}")))
}

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match (parts[0].to_ascii_lowercase().as_str(), &parts[1..]) {
            ("bayes", []) => SchemeSpec::Bayes,
            ("optimal", []) => SchemeSpec::OptimalKStar,
            ("optimal", [k]) => SchemeSpec::Optimal(arg(k, "k", s)?),
            ("uniform_kopt", []) => SchemeSpec::UniformKOpt,
            ("uniform", [k]) => SchemeSpec::Uniform(arg(k, "k", s)?),
            ("geometric_qopt", []) => SchemeSpec::GeometricQOpt,
            ("geometric", [q]) => SchemeSpec::Geometric(arg(q, "q", s)?),
            ("bagged_with_qopt", []) => SchemeSpec::BaggedWithQOpt,
            ("bagged_with", [m]) => SchemeSpec::BaggedWith(arg(m, "m", s)?),
            ("bagged_without_qopt", []) => SchemeSpec::BaggedWithoutQOpt,
            ("bagged_without", [m]) => SchemeSpec::BaggedWithout(arg(m, "m", s)?),
            ("higher_order", [r, b0, k]) => SchemeSpec::HigherOrder {
                r: arg(r, "r", s)?,
                b0: arg(b0, "b0", s)?,
                k: arg(k, "k", s)?,
            },
            _ => return Err(Error::input(format!("unknown scheme spec {s:?}"))),
        };
        Ok(spec)
    }
}
