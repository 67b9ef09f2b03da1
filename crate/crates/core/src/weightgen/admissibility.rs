//! Literal evaluation of the conditions defining the admissible weight classes.
//!
//! `check_w_n_beta` covers the non-negative class (conditions `c1`–`c5`, plus
//! `c0` for non-negativity itself). `check_w_dagger` covers the order-`r`
//! signed class (conditions `d1`–`d6`). Logarithms are natural.

use serde::Serialize;

use crate::format::sig12;
use crate::weightgen::{alpha, WeightVector, SUM_TOLERANCE};

/// One evaluated inequality `lhs ≤ rhs` (or `≥` where noted in `label`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionValue {
    pub id: &'static str,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub passes: bool,
    /// Identifiers of violated conditions, each listed once, in order.
    pub violated: Vec<&'static str>,
    pub values: Vec<ConditionValue>,
    /// The `k2` used for the tail conditions.
    pub k2: usize,
}

impl AdmissibilityReport {
    fn from_values(values: Vec<ConditionValue>, k2: usize) -> Self {
        let mut violated: Vec<&'static str> = Vec::new();
        for v in values.iter().filter(|v| !v.holds) {
            if !violated.contains(&v.id) {
                violated.push(v.id);
            }
        }
        Self {
            passes: violated.is_empty(),
            violated,
            values,
            k2,
        }
    }

    pub fn violates(&self, id: &str) -> bool {
        self.violated.iter().any(|v| *v == id)
    }

    /// Human-readable multi-line summary.
    pub fn render(&self) -> String {
        let mut out = format!(
            "passes={}\nviolated={}\nk2={}\n",
            self.passes,
            self.violated.join(","),
            self.k2
        );
        for v in &self.values {
            out.push_str(&format!(
                "{} {} lhs={} rhs={} holds={}\n",
                v.id,
                v.label,
                sig12(v.lhs),
                sig12(v.rhs),
                v.holds
            ));
        }
        out
    }
}

fn le(id: &'static str, label: impl Into<String>, lhs: f64, rhs: f64) -> ConditionValue {
    ConditionValue {
        id,
        label: label.into(),
        lhs,
        rhs,
        holds: lhs <= rhs,
    }
}

fn ge(id: &'static str, label: impl Into<String>, lhs: f64, rhs: f64) -> ConditionValue {
    ConditionValue {
        id,
        label: label.into(),
        lhs,
        rhs,
        holds: lhs >= rhs,
    }
}

/// `lhs` for a ratio whose denominator must be positive; a non-positive
/// denominator makes the condition fail.
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

struct Moments {
    n: f64,
    inv_log_n: f64,
    n_beta: f64,
    sum_sq: f64,
    sum_abs_cube: f64,
}

impl Moments {
    fn of(w: &[f64], beta: f64) -> Self {
        let n = w.len() as f64;
        Self {
            n,
            inv_log_n: 1.0 / n.ln(),
            n_beta: n.powf(-beta),
            sum_sq: w.iter().map(|x| x * x).sum(),
            sum_abs_cube: w.iter().map(|x| x.abs().powi(3)).sum(),
        }
    }
}

fn k2_cap(n: usize, beta: f64) -> usize {
    ((n as f64).powf(1.0 - beta).floor() as usize).min(n)
}

fn sum_alpha_prefix(w: &[f64], d: usize, ell: usize) -> Vec<f64> {
    // prefix[j] = Σ_{i≤j} α_i^{(ℓ)} w_i
    let mut out = Vec::with_capacity(w.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for (i, wi) in w.iter().enumerate() {
        if *wi != 0.0 {
            acc += alpha(i + 1, d, ell) * wi;
        }
        out.push(acc);
    }
    out
}

/// Checks membership of `w` in the non-negative class with parameter `beta`,
/// using `k2 = ⌊n^{1−β}⌋`.
pub fn check_w_n_beta(w: &WeightVector, d: usize, beta: f64) -> AdmissibilityReport {
    let ws = w.as_slice();
    let m = Moments::of(ws, beta);
    let k2 = k2_cap(ws.len(), beta);
    let sum_alpha = sum_alpha_prefix(ws, d, 1)[ws.len()];
    let tail: f64 = ws[k2..].iter().sum();
    let tail_sq: f64 = ws[k2..].iter().map(|x| x * x).sum();
    let df = d as f64;

    let values = vec![
        ge("c0", "min w_i >= 0", w.min(), 0.0),
        le("c1", "sum w^2 <= n^-beta", m.sum_sq, m.n_beta),
        le(
            "c2",
            "n^(-4/d) (sum alpha w)^2 <= n^-beta",
            m.n.powf(-4.0 / df) * sum_alpha * sum_alpha,
            m.n_beta,
        ),
        le(
            "c3",
            "n^(2/d) sum_{i>k2} w / sum alpha w <= 1/log n",
            ratio(m.n.powf(2.0 / df) * tail, sum_alpha),
            m.inv_log_n,
        ),
        le(
            "c4",
            "sum_{i>k2} w^2 / sum w^2 <= 1/log n",
            ratio(tail_sq, m.sum_sq),
            m.inv_log_n,
        ),
        le(
            "c5",
            "sum w^3 / (sum w^2)^(3/2) <= 1/log n",
            ratio(m.sum_abs_cube, m.sum_sq.powf(1.5)),
            m.inv_log_n,
        ),
    ];
    AdmissibilityReport::from_values(values, k2)
}

/// Checks membership of `w` in the order-`r` signed class with parameter `beta`.
///
/// The existential `k2` is searched over powers of two up to `⌊n^{1−β}⌋` and
/// the cap itself; the first candidate satisfying both parts of `d4` is used
/// (and reused for `d5`). If none does, the cap is reported.
pub fn check_w_dagger(w: &WeightVector, d: usize, beta: f64, r: usize) -> AdmissibilityReport {
    let ws = w.as_slice();
    let n = ws.len();
    let m = Moments::of(ws, beta);
    let df = d as f64;
    let rf = r as f64;
    let prefix_r = sum_alpha_prefix(ws, d, r);
    let sum_alpha_r = prefix_r[n];

    let mut values = Vec::new();
    let sum = w.sum();
    values.push(le("d1", "|sum w - 1|", (sum - 1.0).abs(), SUM_TOLERANCE));
    for ell in 1..r {
        let s_ell = sum_alpha_prefix(ws, d, ell)[n];
        let lhs = ratio(
            m.n.powf(2.0 * rf / df) * s_ell.abs(),
            m.n.powf(2.0 * ell as f64 / df) * sum_alpha_r,
        );
        values.push(le("d1", format!("bias ratio l={ell} <= 1/log n"), lhs, m.inv_log_n));
    }
    values.push(le("d2", "sum w^2 <= n^-beta", m.sum_sq, m.n_beta));
    values.push(le(
        "d3",
        "n^(-4r/d) (sum alpha^(r) w)^2 <= n^-beta",
        m.n.powf(-4.0 * rf / df) * sum_alpha_r * sum_alpha_r,
        m.n_beta,
    ));

    // suffix sums of |w| for the tail part of d4
    let mut suffix_abs = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix_abs[i] = suffix_abs[i + 1] + ws[i].abs();
    }
    let cap = k2_cap(n, beta);
    let d4_at = |k2: usize| -> (f64, f64) {
        let tail = ratio(m.n.powf(2.0 * rf / df) * suffix_abs[k2], sum_alpha_r);
        let head = prefix_r[k2];
        (tail, head)
    };
    let mut candidates: Vec<usize> = std::iter::successors(Some(1usize), |&p| p.checked_mul(2))
        .take_while(|&p| p <= cap)
        .collect();
    if cap >= 1 && candidates.last() != Some(&cap) {
        candidates.push(cap);
    }
    let chosen = candidates.iter().copied().find(|&k2| {
        let (tail, head) = d4_at(k2);
        tail <= m.inv_log_n && head >= beta * (k2 as f64).powf(2.0 * rf / df)
    });
    let k2 = chosen.unwrap_or(cap);
    let (tail, head) = d4_at(k2);
    values.push(le(
        "d4",
        format!("n^(2r/d) sum_{{i>k2}} |w| / sum alpha^(r) w <= 1/log n (k2={k2})"),
        tail,
        m.inv_log_n,
    ));
    values.push(ge(
        "d4",
        format!("sum_{{i<=k2}} alpha^(r) w >= beta k2^(2r/d) (k2={k2})"),
        head,
        beta * (k2 as f64).powf(2.0 * rf / df),
    ));
    let tail_sq: f64 = ws[k2..].iter().map(|x| x * x).sum();
    values.push(le(
        "d5",
        "sum_{i>k2} w^2 / sum w^2 <= 1/log n",
        ratio(tail_sq, m.sum_sq),
        m.inv_log_n,
    ));
    values.push(le(
        "d6",
        "sum |w|^3 / (sum w^2)^(3/2) <= 1/log n",
        ratio(m.sum_abs_cube, m.sum_sq.powf(1.5)),
        m.inv_log_n,
    ));
    AdmissibilityReport::from_values(values, k2)
}
