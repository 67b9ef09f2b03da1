//! Synthetic two-class populations built from isotropic Gaussian mixtures,
//! with analytic `η`, its derivatives, the Bayes rule and the boundary
//! constants `B1`, `B2`.
//!
//! Densities are evaluated on a log scale: every component term is divided
//! by the largest one, so `η` and its derivatives stay finite far into the
//! tails. Only quantities that need `f̄` itself multiply the scale back.

mod boundary;
mod constants;
pub mod quadrature;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::config::{parse_list, KvConfig};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::region::BoxRegion;
use crate::search::{unit_ball_volume, NormSpec};

pub use boundary::{decision_set, DecisionSet};
pub use constants::{
    bayes_risk, bayes_risk_with, compute_b2_r, compute_constants, compute_constants_with,
    AsymptoticConstants, ConstantOptions, RiskOptions,
};

/// One isotropic Gaussian component `N(mean, variance · I)` with mixing weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub mean: Vec<f64>,
    pub variance: f64,
    pub weight: f64,
}

impl Component {
    pub fn new(mean: Vec<f64>, variance: f64, weight: f64) -> Self {
        Self {
            mean,
            variance,
            weight,
        }
    }
}

/// Tail mass left outside the default region, per axis.
pub const DEFAULT_REGION_TAIL: f64 = 1e-8;
/// Tail mass ignored when an unbounded region has to be truncated for quadrature.
pub(crate) const TRUNCATION_TAIL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationModel {
    dim: usize,
    prior: f64,
    class1: Vec<Component>,
    class2: Vec<Component>,
    region: BoxRegion,
}

/// `η`, its gradient and Hessian at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaDerivatives {
    pub eta: f64,
    pub gradient: Vec<f64>,
    /// Row-major `d × d`.
    pub hessian: Vec<Vec<f64>>,
}

impl EtaDerivatives {
    pub fn laplacian(&self) -> f64 {
        (0..self.gradient.len()).map(|j| self.hessian[j][j]).sum()
    }

    pub fn gradient_norm(&self) -> f64 {
        self.gradient.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Scaled sums over components: everything is `e^{-shift}` times the true value.
struct Scaled {
    shift: f64,
    g: f64,
    g_grad: Vec<f64>,
    g_hess: Vec<Vec<f64>>,
    h: f64,
    h_grad: Vec<f64>,
    h_hess: Vec<Vec<f64>>,
}

fn validate_class(name: &str, comps: &[Component], dim: usize) -> Result<()> {
    if comps.is_empty() {
        return Err(Error::input(format!("{name} has no components")));
    }
    let mut total = 0.0;
    for (i, c) in comps.iter().enumerate() {
        if c.mean.len() != dim {
            return Err(Error::input(format!(
                "{name} component {} has dimension {}, expected {dim}",
                i + 1,
                c.mean.len()
            )));
        }
        if c.mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(format!("{name} component {} has a non-finite mean", i + 1)));
        }
        if !(c.variance > 0.0 && c.variance.is_finite()) {
            return Err(Error::input(format!(
                "{name} component {} needs a positive variance, got {}",
                i + 1,
                c.variance
            )));
        }
        if !(c.weight > 0.0) {
            return Err(Error::input(format!(
                "{name} component {} needs a positive weight, got {}",
                i + 1,
                c.weight
            )));
        }
        total += c.weight;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::input(format!("{name} weights sum to {total}, expected 1")));
    }
    Ok(())
}

impl PopulationModel {
    /// Builds a population. `region = None` selects [`PopulationModel::mass_box`]
    /// with tail `1e-8` per axis.
    pub fn new(
        prior: f64,
        class1: Vec<Component>,
        class2: Vec<Component>,
        region: Option<BoxRegion>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&prior) {
            return Err(Error::input(format!("prior must lie in [0, 1], got {prior}")));
        }
        let dim = class1.first().map(|c| c.mean.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::input("population dimension must be at least 1"));
        }
        validate_class("class1", &class1, dim)?;
        validate_class("class2", &class2, dim)?;
        let mut pop = Self {
            dim,
            prior,
            class1,
            class2,
            region: BoxRegion::everything(dim),
        };
        pop.region = match region {
            Some(r) if r.dim() != dim => {
                return Err(Error::input(format!(
                    "region has dimension {}, population has {dim}",
                    r.dim()
                )))
            }
            Some(r) => r,
            None => pop.mass_box(DEFAULT_REGION_TAIL),
        };
        Ok(pop)
    }

    /// Two single Gaussians on the line.
    pub fn gaussian_pair_1d(prior: f64, class1: (f64, f64), class2: (f64, f64)) -> Result<Self> {
        Self::new(
            prior,
            vec![Component::new(vec![class1.0], class1.1, 1.0)],
            vec![Component::new(vec![class2.0], class2.1, 1.0)],
            None,
        )
    }

    /// Two isotropic Gaussians with a common variance; the boundary is a hyperplane.
    pub fn isotropic_pair(prior: f64, mean1: Vec<f64>, mean2: Vec<f64>, variance: f64) -> Result<Self> {
        Self::new(
            prior,
            vec![Component::new(mean1, variance, 1.0)],
            vec![Component::new(mean2, variance, 1.0)],
            None,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn class1(&self) -> &[Component] {
        &self.class1
    }

    pub fn class2(&self) -> &[Component] {
        &self.class2
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn with_region(mut self, region: BoxRegion) -> Result<Self> {
        if region.dim() != self.dim {
            return Err(Error::input("region dimension does not match the population"));
        }
        self.region = region;
        Ok(self)
    }

    /// Same population with class labels exchanged and `π ↦ 1 − π`.
    pub fn swapped(&self) -> Self {
        Self {
            dim: self.dim,
            prior: 1.0 - self.prior,
            class1: self.class2.clone(),
            class2: self.class1.clone(),
            region: self.region.clone(),
        }
    }

    /// Population of `c·X` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let map = |comps: &[Component]| -> Vec<Component> {
            comps
                .iter()
                .map(|k| Component::new(k.mean.iter().map(|m| m * c).collect(), k.variance * c * c, k.weight))
                .collect()
        };
        Self {
            dim: self.dim,
            prior: self.prior,
            class1: map(&self.class1),
            class2: map(&self.class2),
            region: self.region.scaled(c),
        }
    }

    /// Per-axis box whose marginal `f̄` mass outside each side is `tail / 2`.
    pub fn mass_box(&self, tail: f64) -> BoxRegion {
        let mut lower = Vec::with_capacity(self.dim);
        let mut upper = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let parts: Vec<(f64, f64, f64)> = self
                .weighted_components()
                .filter(|(w, _)| *w > 0.0)
                .map(|(w, c)| (w, c.mean[j], c.variance.sqrt()))
                .collect();
            // upper tail P(X_j > t) for the marginal mixture
            let upper_tail = |t: f64| -> f64 {
                parts
                    .iter()
                    .map(|(w, m, s)| w * 0.5 * erfc((t - m) / (s * std::f64::consts::SQRT_2)))
                    .sum()
            };
            let lower_tail = |t: f64| -> f64 {
                parts
                    .iter()
                    .map(|(w, m, s)| w * 0.5 * erfc((m - t) / (s * std::f64::consts::SQRT_2)))
                    .sum()
            };
            let spread = parts.iter().map(|p| p.2).fold(0.0, f64::max);
            let lo0 = parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let hi0 = parts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let target = 0.5 * tail;
            let hi = bisect_decreasing(upper_tail, hi0, hi0 + 40.0 * spread, target);
            let lo = -bisect_decreasing(|t| lower_tail(-t), -lo0, -lo0 + 40.0 * spread, target);
            lower.push(lo);
            upper.push(hi);
        }
        BoxRegion::new(lower, upper).expect("mass box has positive width")
    }

    fn weighted_components(&self) -> impl Iterator<Item = (f64, &Component)> {
        let p = self.prior;
        self.class1
            .iter()
            .map(move |c| (p * c.weight, c))
            .chain(self.class2.iter().map(move |c| ((1.0 - p) * c.weight, c)))
    }

    fn log_term(&self, w: f64, c: &Component, x: &[f64]) -> f64 {
        if w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let r2: f64 = x.iter().zip(&c.mean).map(|(a, b)| (a - b) * (a - b)).sum();
        w.ln() - 0.5 * self.dim as f64 * (2.0 * std::f64::consts::PI * c.variance).ln()
            - r2 / (2.0 * c.variance)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::input(format!(
                "point has dimension {}, population has {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("point has a non-finite coordinate"));
        }
        Ok(())
    }

    /// Log-scale shift and the scaled component terms, class-1 terms first.
    fn scaled_terms(&self, x: &[f64]) -> Result<(f64, Vec<(bool, f64, &Component)>)> {
        let logs: Vec<(bool, f64, &Component)> = self
            .class1
            .iter()
            .map(|c| (true, self.log_term(self.prior * c.weight, c, x), c))
            .chain(
                self.class2
                    .iter()
                    .map(|c| (false, self.log_term((1.0 - self.prior) * c.weight, c, x), c)),
            )
            .collect();
        let shift = logs.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::numerical(format!("density underflows at {x:?}")));
        }
        Ok((
            shift,
            logs.into_iter().map(|(c1, l, c)| (c1, (l - shift).exp(), c)).collect(),
        ))
    }

    fn scaled_sums(&self, x: &[f64], hessian: bool) -> Result<Scaled> {
        self.check_point(x)?;
        let d = self.dim;
        let (shift, terms) = self.scaled_terms(x)?;
        let mut s = Scaled {
            shift,
            g: 0.0,
            g_grad: vec![0.0; d],
            g_hess: vec![vec![0.0; d]; if hessian { d } else { 0 }],
            h: 0.0,
            h_grad: vec![0.0; d],
            h_hess: vec![vec![0.0; d]; if hessian { d } else { 0 }],
        };
        for (is1, t, c) in terms {
            if t == 0.0 {
                continue;
            }
            let u: Vec<f64> = x.iter().zip(&c.mean).map(|(a, m)| (a - m) / c.variance).collect();
            s.h += t;
            if is1 {
                s.g += t;
            }
            for i in 0..d {
                let gi = -t * u[i];
                s.h_grad[i] += gi;
                if is1 {
                    s.g_grad[i] += gi;
                }
                if hessian {
                    for j in 0..d {
                        let mut hij = t * u[i] * u[j];
                        if i == j {
                            hij -= t / c.variance;
                        }
                        s.h_hess[i][j] += hij;
                        if is1 {
                            s.g_hess[i][j] += hij;
                        }
                    }
                }
            }
        }
        Ok(s)
    }

    /// `η(x) = π f1(x) / f̄(x)`.
    pub fn eta(&self, x: &[f64]) -> Result<f64> {
        let s = self.scaled_sums(x, false)?;
        Ok(s.g / s.h)
    }

    pub fn eta_derivatives(&self, x: &[f64]) -> Result<EtaDerivatives> {
        let s = self.scaled_sums(x, true)?;
        Ok(eta_from_scaled(&s))
    }

    /// `(f̄(x), ∇f̄(x))`; fails when `f̄(x)` underflows to zero.
    pub fn fbar_derivatives(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let s = self.scaled_sums(x, false)?;
        let scale = s.shift.exp();
        let value = s.h * scale;
        if value == 0.0 {
            return Err(Error::numerical(format!("f̄ underflows at {x:?}")));
        }
        Ok((value, s.h_grad.iter().map(|g| g * scale).collect()))
    }

    pub fn fbar(&self, x: &[f64]) -> Result<f64> {
        self.fbar_derivatives(x).map(|(v, _)| v)
    }

    /// `(π f1(x), (1 − π) f2(x))`, possibly underflowing to zero.
    pub fn class_densities(&self, x: &[f64]) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for c in &self.class1 {
            a += self.log_term(self.prior * c.weight, c, x).exp();
        }
        for c in &self.class2 {
            b += self.log_term((1.0 - self.prior) * c.weight, c, x).exp();
        }
        (a, b)
    }

    /// `ln(π f1(x)) − ln((1 − π) f2(x))`, finite wherever both classes have mass.
    pub fn log_odds(&self, x: &[f64]) -> f64 {
        let lse = |it: &mut dyn Iterator<Item = f64>| -> f64 {
            let v: Vec<f64> = it.collect();
            let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !m.is_finite() {
                return m;
            }
            m + v.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
        };
        let l1 = lse(&mut self.class1.iter().map(|c| self.log_term(self.prior * c.weight, c, x)));
        let l2 = lse(&mut self
            .class2
            .iter()
            .map(|c| self.log_term((1.0 - self.prior) * c.weight, c, x)));
        l1 - l2
    }

    /// Class 1 iff `η(x) ≥ 1/2`, otherwise class 2.
    pub fn bayes_classify(&self, x: &[f64]) -> usize {
        if self.log_odds(x) >= 0.0 {
            1
        } else {
            2
        }
    }

    /// `a(x) = (∇η·∇f̄ + ½Δη f̄) / ((d+2) a_d^{2/d} f̄^{1+2/d})`, with `a_d` the
    /// volume of the unit ball of `norm`.
    pub fn a_of_x(&self, x: &[f64], norm: NormSpec) -> Result<f64> {
        let s = self.scaled_sums(x, true)?;
        let e = eta_from_scaled(&s);
        let d = self.dim as f64;
        let dot: f64 = e.gradient.iter().zip(&s.h_grad).map(|(a, b)| a * b).sum();
        let num = dot + 0.5 * e.laplacian() * s.h;
        let ad = unit_ball_volume(self.dim, norm);
        let log_den = (d + 2.0).ln() + 2.0 / d * ad.ln() + (1.0 + 2.0 / d) * s.h.ln();
        let factor = (-2.0 * s.shift / d - log_den).exp();
        if !factor.is_finite() {
            return Err(Error::numerical(format!("f̄ underflows at {x:?}")));
        }
        Ok(num * factor)
    }

    /// Mixed partial derivative `∂^{m} f̄(x) / ∂x_1^{m_1}…∂x_d^{m_d}` divided by
    /// `e^{shift}` (the scale returned alongside).
    fn scaled_partial(&self, x: &[f64], m: &[usize]) -> Result<(f64, f64)> {
        let (shift, terms) = self.scaled_terms(x)?;
        let mut acc = 0.0;
        for (_, t, c) in terms {
            if t == 0.0 {
                continue;
            }
            let sigma = c.variance.sqrt();
            let mut prod = t;
            for (j, &mj) in m.iter().enumerate() {
                if mj > 0 {
                    let z = (x[j] - c.mean[j]) / sigma;
                    let sign = if mj % 2 == 1 { -1.0 } else { 1.0 };
                    prod *= sign * hermite_he(mj, z) / sigma.powi(mj as i32);
                }
            }
            acc += prod;
        }
        Ok((acc, shift))
    }

    /// Mixed partial derivative of `f̄`; see [`PopulationModel::a_r_of_x`].
    pub fn fbar_partial(&self, x: &[f64], m: &[usize]) -> Result<f64> {
        self.check_point(x)?;
        if m.len() != self.dim {
            return Err(Error::input("multi-index length must equal the dimension"));
        }
        let (v, shift) = self.scaled_partial(x, m)?;
        Ok(v * shift.exp())
    }

    /// Order-`r` bias coefficient (Euclidean norm):
    ///
    /// `a^{(r)}(x) = Σ_j Σ_{|s|=r−1} D_{s,j} {η_j f̄_{2s+e_j} + ½ η_jj f̄_{2s}}
    ///  / ((2r−2)! a_d^{1+2r/d} f̄^{1+2r/d})`.
    ///
    /// `r = 1` reduces to [`PopulationModel::a_of_x`].
    pub fn a_r_of_x(&self, x: &[f64], r: usize) -> Result<f64> {
        if r == 0 {
            return Err(Error::input("a^(r) needs r >= 1"));
        }
        let s = self.scaled_sums(x, true)?;
        let e = eta_from_scaled(&s);
        let d = self.dim;
        let df = d as f64;
        let mut sum = 0.0;
        for multi in multi_indices(d, r - 1) {
            let even: Vec<usize> = multi.iter().map(|v| 2 * v).collect();
            let (base, _) = self.scaled_partial(x, &even)?;
            for j in 0..d {
                let mut up = even.clone();
                up[j] += 1;
                let (with_j, _) = self.scaled_partial(x, &up)?;
                sum += ball_moment(&multi, j) * (e.gradient[j] * with_j + 0.5 * e.hessian[j][j] * base);
            }
        }
        let rf = r as f64;
        let ad = unit_ball_volume(d, NormSpec::Euclidean);
        let log_den = ln_gamma(2.0 * rf - 1.0)
            + (1.0 + 2.0 * rf / df) * ad.ln()
            + (1.0 + 2.0 * rf / df) * s.h.ln();
        let factor = (-2.0 * rf * s.shift / df - log_den).exp();
        if !factor.is_finite() {
            return Err(Error::numerical(format!("f̄ underflows at {x:?}")));
        }
        Ok(sum * factor)
    }

    /// Draws `count` labelled points: `Y = 1` with probability `π`, then `X`
    /// from the chosen class mixture. Deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<LabeledDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, count)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<LabeledDataset> {
        if count == 0 {
            return Err(Error::input("sample count must be at least 1"));
        }
        let mut coords = Vec::with_capacity(count * self.dim);
        let mut labels = Vec::with_capacity(count);
        for _ in 0..count {
            let one = rng.random::<f64>() < self.prior;
            let comps = if one { &self.class1 } else { &self.class2 };
            let c = pick(comps, rng.random::<f64>());
            let sigma = c.variance.sqrt();
            for m in &c.mean {
                let z: f64 = rng.sample(StandardNormal);
                coords.push(m + sigma * z);
            }
            labels.push(if one { 1 } else { 2 });
        }
        LabeledDataset::from_flat(self.dim, coords, labels)
    }

    /// Reads a population from `key = value` text.
    ///
    /// Keys: `dim`, `prior`, repeated `class1` / `class2` entries of the form
    /// `mean=<m1,…,md> var=<σ²> [weight=<ω>]`, optional `region.lower` /
    /// `region.upper` (comma-separated), optional `seed` (ignored here).
    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        cfg.check_keys(&["dim", "prior", "class1", "class2", "region.lower", "region.upper", "seed"])?;
        let dim: usize = cfg.require("dim")?;
        let prior: f64 = cfg.require("prior")?;
        let parse_class = |key: &str| -> Result<Vec<Component>> {
            let entries = cfg.get_all(key);
            if entries.is_empty() {
                return Err(Error::config(format!("missing {key} component")));
            }
            entries
                .iter()
                .map(|e| parse_component(&e.value, dim).map_err(|err| {
                    Error::config(format!("line {}: {err}", e.line))
                }))
                .collect()
        };
        let class1 = parse_class("class1")?;
        let class2 = parse_class("class2")?;
        let region = match (cfg.get("region.lower"), cfg.get("region.upper")) {
            (None, None) => None,
            (Some(lo), Some(hi)) => Some(
                BoxRegion::new(parse_list(lo)?, parse_list(hi)?)
                    .map_err(|e| Error::config(e.to_string()))?,
            ),
            _ => return Err(Error::config("region.lower and region.upper must be given together")),
        };
        Self::new(prior, class1, class2, region).map_err(|e| match e {
            Error::Input(m) => Error::Config(m),
            other => other,
        })
    }

    pub fn read_config(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_config(&KvConfig::read(path)?)
    }
}

fn parse_component(text: &str, dim: usize) -> Result<Component> {
    let mut mean = None;
    let mut var = None;
    let mut weight = 1.0;
    for field in text.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::config(format!("expected name=value, got {field:?}")))?;
        match k {
            "mean" => mean = Some(parse_list::<f64>(v)?),
            "var" => var = Some(v.parse::<f64>().map_err(|e| Error::config(format!("var: {e}")))?),
            "weight" => weight = v.parse::<f64>().map_err(|e| Error::config(format!("weight: {e}")))?,
            _ => return Err(Error::config(format!("unknown component field {k:?}"))),
        }
    }
    let mean = mean.ok_or_else(|| Error::config("component needs mean="))?;
    if mean.len() != dim {
        return Err(Error::config(format!("mean has {} entries, dim = {dim}", mean.len())));
    }
    let variance = var.ok_or_else(|| Error::config("component needs var="))?;
    Ok(Component::new(mean, variance, weight))
}

fn pick(comps: &[Component], u: f64) -> &Component {
    let mut acc = 0.0;
    for c in comps {
        acc += c.weight;
        if u < acc {
            return c;
        }
    }
    comps.last().expect("validated non-empty")
}

fn eta_from_scaled(s: &Scaled) -> EtaDerivatives {
    let d = s.g_grad.len();
    let eta = s.g / s.h;
    let gradient: Vec<f64> = (0..d).map(|i| (s.g_grad[i] - eta * s.h_grad[i]) / s.h).collect();
    let hessian = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    (s.g_hess[i][j]
                        - eta * s.h_hess[i][j]
                        - gradient[i] * s.h_grad[j]
                        - s.h_grad[i] * gradient[j])
                        / s.h
                })
                .collect()
        })
        .collect();
    EtaDerivatives {
        eta,
        gradient,
        hessian,
    }
}

/// Probabilists' Hermite polynomial `He_n(z)`.
pub(crate) fn hermite_he(n: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, z);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let next = z * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All multi-indices of length `d` with entries summing to `total`.
pub(crate) fn multi_indices(d: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == d - 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=total {
            prefix.push(v);
            rec(d, total - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, total, &mut Vec::with_capacity(d), &mut out);
    out
}

fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `∫_0^π cos^{2m1} sin^{2m2}`.
pub(crate) fn g1(m1: usize, m2: usize) -> f64 {
    (ln_factorial(2 * m1) + ln_factorial(2 * m2) + std::f64::consts::PI.ln()
        - (m1 + m2) as f64 * 4f64.ln()
        - ln_factorial(m1)
        - ln_factorial(m2)
        - ln_factorial(m1 + m2))
    .exp()
}

/// `∫_0^π cos^{2m1} sin^{2m2+1}`.
pub(crate) fn g2(m1: usize, m2: usize) -> f64 {
    ((m2 + 1) as f64 * 4f64.ln() + ln_factorial(2 * m1) + ln_factorial(m2) + ln_factorial(m1 + m2 + 1)
        - ln_factorial(m1)
        - ln_factorial(2 * (m1 + m2 + 1)))
    .exp()
}

/// `g3(m1, m3)` with `m3` passed doubled (`m3 ∈ {0, ½, 1, …}`): `g1` for integer
/// `m3`, and `∫ cos^{2m1} sin^{2m3} = g2(m1, m3 − ½)` otherwise.
pub(crate) fn g3(m1: usize, twice_m3: usize) -> f64 {
    if twice_m3 % 2 == 0 {
        g1(m1, twice_m3 / 2)
    } else {
        g2(m1, (twice_m3 - 1) / 2)
    }
}

/// `D_{s,j} = ∫_{‖v‖≤1} v^{2s} v_j² dv` through the spherical-coordinate product
/// `2/(d+2|s|+2) Π_{j'<d} g3(s_{j'} + 1{j'=j}, s_{j'+1}+…+s_d + (d−j'−1)/2 + 1{j'<j})`.
///
/// The `v_j²` factor raises the sine power of every angle before `j`, not only
/// the one at `j − 1`; the two readings agree for `j ≤ 2`.
pub fn ball_moment(s: &[usize], j: usize) -> f64 {
    let d = s.len();
    let total: usize = s.iter().sum();
    let mut prod = 2.0 / (d + 2 * total + 2) as f64;
    // 1-based j' = 1..d-1 in the product; j is 0-based here
    for jp in 1..d {
        let first = s[jp - 1] + usize::from(jp == j + 1);
        let tail: usize = s[jp..].iter().sum();
        let twice = 2 * tail + (d - jp - 1) + 2 * usize::from(jp < j + 1);
        prod *= g3(first, twice);
    }
    prod
}

fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    // f decreasing; find t with f(t) = target, assuming f(lo) ≥ target ≥ f(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}
