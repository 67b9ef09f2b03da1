//! Closed-form asymptotic quantities: the optimal number of positive weights,
//! the bagging fraction, the regret functionals and the limiting regret ratios.
//!
//! All functions are pure. Formulas that can leave their valid range at small
//! `n` clamp and set a `clamped` flag instead of failing.

use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::weightgen::{alpha, WeightVector};

fn check_constants(b1: f64, b2: f64) -> Result<()> {
    if !(b1 > 0.0 && b1.is_finite()) {
        return Err(Error::input(format!("B1 must be positive and finite, got {b1}")));
    }
    if !(b2 > 0.0 && b2.is_finite()) {
        return Err(Error::input(format!(
            "B2 = {b2}: the optimal-weight theory needs B2 > 0"
        )));
    }
    Ok(())
}

/// Optimal number of positive weights together with its unrounded value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KStar {
    pub k: usize,
    /// Real value before flooring.
    pub raw: f64,
    /// Set when `raw` fell outside `[1, n]` and `k` was pinned to the bound.
    pub clamped: bool,
}

fn clamp_count(raw: f64, n: usize) -> KStar {
    let floored = raw.floor();
    if !(floored >= 1.0) {
        KStar { k: 1, raw, clamped: true }
    } else if floored > n as f64 {
        KStar { k: n, raw, clamped: true }
    } else {
        KStar { k: floored as usize, raw, clamped: false }
    }
}

/// `k* = ⌊{d(d+4)/(2(d+2))}^{d/(d+4)} (B1/B2)^{d/(d+4)} n^{4/(d+4)}⌋`, clamped to `[1, n]`.
pub fn k_star(b1: f64, b2: f64, d: usize, n: usize) -> Result<KStar> {
    check_constants(b1, b2)?;
    if n == 0 || d == 0 {
        return Err(Error::input("k* needs n >= 1 and d >= 1"));
    }
    let df = d as f64;
    let e = df / (df + 4.0);
    let raw = (df * (df + 4.0) / (2.0 * (df + 2.0))).powf(e)
        * (b1 / b2).powf(e)
        * (n as f64).powf(4.0 / (df + 4.0));
    Ok(clamp_count(raw, n))
}

/// Factor by which `k*` exceeds the optimal unweighted `k`: `{2(d+4)/(d+2)}^{d/(d+4)}`.
pub fn mu_factor(d: usize) -> f64 {
    let df = d as f64;
    (2.0 * (df + 4.0) / (df + 2.0)).powf(df / (df + 4.0))
}

/// The optimal-profile size `μ(k) = ⌊mu_factor(d)·k⌋` matched to an unweighted k-NN rule.
pub fn mu_of_k(k: usize, d: usize) -> usize {
    (mu_factor(d) * k as f64).floor() as usize
}

/// Optimal unweighted `k`, defined through `k*/mu_factor(d)` on the unrounded `k*`.
pub fn k_opt(b1: f64, b2: f64, d: usize, n: usize) -> Result<KStar> {
    let ks = k_star(b1, b2, d, n)?;
    Ok(clamp_count(ks.raw / mu_factor(d), n))
}

/// Resampling fraction clamped into `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QOpt {
    pub q: f64,
    pub raw: f64,
    pub clamped: bool,
}

const Q_FLOOR: f64 = f64::EPSILON;
const Q_CEIL: f64 = 1.0 - f64::EPSILON;

fn clamp_fraction(raw: f64) -> QOpt {
    if raw < Q_FLOOR {
        QOpt { q: Q_FLOOR, raw, clamped: true }
    } else if raw > Q_CEIL {
        QOpt { q: Q_CEIL, raw, clamped: true }
    } else {
        QOpt { q: raw, raw, clamped: false }
    }
}

/// `Γ(2 + 2/d)`, the bias moment of the geometric weight profile.
pub fn geometric_bias_moment(d: usize) -> f64 {
    gamma(2.0 + 2.0 / d as f64)
}

/// Asymptotically optimal bagging fraction
/// `q_opt = 8^{d/(d+4)} Γ(2+2/d)^{2d/(d+4)} d^{−d/(d+4)} (B2/B1)^{d/(d+4)} n^{−4/(d+4)}`.
pub fn q_opt(b1: f64, b2: f64, d: usize, n: usize) -> Result<QOpt> {
    check_constants(b1, b2)?;
    if n == 0 || d == 0 {
        return Err(Error::input("q_opt needs n >= 1 and d >= 1"));
    }
    let df = d as f64;
    let e = df / (df + 4.0);
    let raw = 8f64.powf(e) * geometric_bias_moment(d).powf(2.0 * e) * df.powf(-e)
        * (b2 / b1).powf(e)
        * (n as f64).powf(-4.0 / (df + 4.0));
    Ok(clamp_fraction(raw))
}

/// Bagging fraction matched to an unweighted k-NN rule:
/// `q̂ = Γ(2+2/d)^{2d/(d+4)} 2^{−d/(d+4)} / k`.
pub fn q_hat_of_k(k: usize, d: usize) -> Result<QOpt> {
    if k == 0 || d == 0 {
        return Err(Error::input("q_hat needs k >= 1 and d >= 1"));
    }
    let df = d as f64;
    let e = df / (df + 4.0);
    let raw = geometric_bias_moment(d).powf(2.0 * e) * 2f64.powf(-e) / k as f64;
    Ok(clamp_fraction(raw))
}

/// The two terms of the regret expansion for a weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegretTerms {
    /// `B1 Σ w_i²`
    pub variance: f64,
    /// `B2 (Σ α_i^{(r)} w_i / n^{2r/d})²`
    pub squared_bias: f64,
}

impl RegretTerms {
    pub fn total(&self) -> f64 {
        self.variance + self.squared_bias
    }
}

/// Variance and squared-bias terms of the order-`r` expansion.
pub fn regret_terms(w: &WeightVector, b1: f64, b2: f64, d: usize, r: usize) -> RegretTerms {
    let n = w.n() as f64;
    let bias = w.sum_alpha(d, r) / n.powf(2.0 * r as f64 / d as f64);
    RegretTerms {
        variance: b1 * w.sum_sq(),
        squared_bias: b2 * bias * bias,
    }
}

/// `γ_n(w) = B1 Σ w_i² + B2 (Σ α_i w_i / n^{2/d})²`.
pub fn gamma_n(w: &WeightVector, b1: f64, b2: f64, d: usize) -> f64 {
    regret_terms(w, b1, b2, d, 1).total()
}

/// `γ_n^{(r)}(w) = B1 Σ w_i² + B2^{(r)} (Σ α_i^{(r)} w_i / n^{2r/d})²`.
pub fn gamma_n_r(w: &WeightVector, b1: f64, b2_r: f64, d: usize, r: usize) -> f64 {
    regret_terms(w, b1, b2_r, d, r).total()
}

/// Leading regret of the bagged classifier as a function of the fraction `q`:
/// `γ̃_n(q) = (B1/2) q + B2 Γ(2+2/d)² / (n^{4/d} q^{4/d})`.
pub fn gamma_tilde(q: f64, b1: f64, b2: f64, d: usize, n: usize) -> f64 {
    let df = d as f64;
    let g = geometric_bias_moment(d);
    0.5 * b1 * q + b2 * g * g / ((n as f64).powf(4.0 / df) * q.powf(4.0 / df))
}

/// Limiting regret ratio of optimally weighted to optimal unweighted k-NN:
/// `4^{−d/(d+4)} ((2d+4)/(d+4))^{(2d+4)/(d+4)}`.
pub fn regret_ratio_wnn(d: usize) -> f64 {
    let df = d as f64;
    4f64.powf(-df / (df + 4.0))
        * ((2.0 * df + 4.0) / (df + 4.0)).powf((2.0 * df + 4.0) / (df + 4.0))
}

/// Limiting regret ratio of optimally bagged 1-NN to optimal unweighted k-NN:
/// `Γ(2+2/d)^{2d/(d+4)} / 2^{4/(d+4)}`.
pub fn regret_ratio_bnn(d: usize) -> f64 {
    let df = d as f64;
    // through ln Γ so that d = 2 gives exactly 2^{2/3}/2^{2/3}
    let lg = ln_gamma(2.0 + 2.0 / df);
    (2.0 * df / (df + 4.0) * lg - 4.0 / (df + 4.0) * 2f64.ln()).exp()
}

/// Limit of `n^{4/(d+4)} × regret` for the optimal weights:
/// `((d+2)^{(2d+4)/(d+4)} / 2^{4/(d+4)}) ((d+4)/d)^{d/(d+4)} B1^{4/(d+4)} B2^{d/(d+4)}`.
pub fn asymp_regret_constant(b1: f64, b2: f64, d: usize) -> Result<f64> {
    check_constants(b1, b2)?;
    let df = d as f64;
    let s = df + 4.0;
    Ok((df + 2.0).powf((2.0 * df + 4.0) / s) / 2f64.powf(4.0 / s)
        * ((df + 4.0) / df).powf(df / s)
        * b1.powf(4.0 / s)
        * b2.powf(df / s))
}

/// Limit of `n^{4/(d+4)} γ_n(w*)` when `w*` uses the unrounded `k*`:
/// `((d+2)^{(2d+4)/(d+4)} / 2^{4/(d+4)}) (d(d+4))^{−d/(d+4)} B1^{4/(d+4)} B2^{d/(d+4)}`.
///
/// Differs from [`asymp_regret_constant`] by the factor `(d+4)^{2d/(d+4)}`.
pub fn gamma_limit_at_k_star(b1: f64, b2: f64, d: usize) -> Result<f64> {
    check_constants(b1, b2)?;
    let df = d as f64;
    let s = df + 4.0;
    Ok((df + 2.0).powf((2.0 * df + 4.0) / s) / 2f64.powf(4.0 / s)
        * (df * (df + 4.0)).powf(-df / s)
        * b1.powf(4.0 / s)
        * b2.powf(df / s))
}

/// Exact and leading-order values of `Σ_{i≤k} α_i^{(ℓ1)} α_i^{(ℓ2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaProductSum {
    pub exact: f64,
    /// `(d+2ℓ1)(d+2ℓ2) / (d(d+2ℓ1+2ℓ2)) k^{1+2(ℓ1+ℓ2)/d}`
    pub asymptotic: f64,
}

impl AlphaProductSum {
    pub fn relative_error(&self) -> f64 {
        (self.exact / self.asymptotic - 1.0).abs()
    }
}

pub fn sum_alpha_products(k: usize, ell1: usize, ell2: usize, d: usize) -> AlphaProductSum {
    let exact = (1..=k).map(|i| alpha(i, d, ell1) * alpha(i, d, ell2)).sum();
    let (df, a, b) = (d as f64, ell1 as f64, ell2 as f64);
    let asymptotic = (df + 2.0 * a) * (df + 2.0 * b) / (df * (df + 2.0 * a + 2.0 * b))
        * (k as f64).powf(1.0 + 2.0 * (a + b) / df);
    AlphaProductSum { exact, asymptotic }
}
