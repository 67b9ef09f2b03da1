//! Weight vectors for weighted nearest-neighbour classifiers.
//!
//! Every generator returns a [`WeightVector`] of length `n` (the training
//! sample size) whose entries sum to one. The asymptotic functionals that
//! score these vectors live in [`asymptotics`]; membership tests for the
//! admissible weight classes live in [`admissibility`].

pub mod admissibility;
pub mod asymptotics;
mod higher_order;

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::read_numeric_table;
use crate::error::{Error, Result};
use crate::format::sig12;

pub use higher_order::{higher_order_coefficients, higher_order_weights, CoefficientPath};

/// Tolerance on `Σ w_i = 1` for every generated vector.
pub const SUM_TOLERANCE: f64 = 1e-10;

/// Negative entries smaller than this in magnitude are rounding dust and are
/// clamped to zero in the non-negative schemes.
pub const NEGATIVE_DUST: f64 = 1e-12;

/// Which generator produced a weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    UniformK,
    Optimal,
    BaggedWith,
    BaggedWithout,
    Geometric,
    HigherOrder,
    Custom,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::UniformK => "uniform_k",
            Scheme::Optimal => "optimal",
            Scheme::BaggedWith => "bagged_with",
            Scheme::BaggedWithout => "bagged_without",
            Scheme::Geometric => "geometric",
            Scheme::HigherOrder => "higher_order",
            Scheme::Custom => "custom",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match norm.as_str() {
            "uniform" | "uniform_k" | "knn" => Scheme::UniformK,
            "optimal" | "wnn" => Scheme::Optimal,
            "bagged_with" => Scheme::BaggedWith,
            "bagged_without" => Scheme::BaggedWithout,
            "geometric" | "bagged_geometric" => Scheme::Geometric,
            "higher_order" => Scheme::HigherOrder,
            "custom" => Scheme::Custom,
            _ => return Err(Error::input(format!("unknown weight scheme '{s}'"))),
        })
    }
}

/// Parameters a generator was called with; unused ones stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub q: Option<f64>,
    pub r: Option<usize>,
    pub b0: Option<f64>,
    pub d: Option<usize>,
}

/// A length-`n` weight sequence `(w_{n1}, …, w_{nn})` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    scheme: Scheme,
    params: SchemeParams,
}

impl WeightVector {
    fn generated(weights: Vec<f64>, scheme: Scheme, params: SchemeParams) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::numerical(format!(
                "{scheme} weights sum to {sum:e}, off by more than {SUM_TOLERANCE:e}"
            )));
        }
        Ok(Self {
            weights,
            scheme,
            params,
        })
    }

    /// Wraps an arbitrary user vector; it must be finite and sum to one.
    pub fn custom(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::input("weight vector is empty"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::input("weight vector has non-finite entries"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::input(format!(
                "weights sum to {}, expected 1 within {SUM_TOLERANCE:e}",
                sig12(sum)
            )));
        }
        Ok(Self {
            weights,
            scheme: Scheme::Custom,
            params: SchemeParams::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// Number of leading entries needed to cover every non-zero weight.
    pub fn support(&self) -> usize {
        self.weights
            .iter()
            .rposition(|&w| w != 0.0)
            .map_or(0, |p| p + 1)
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// `Σ_i α_i^{(ℓ)} w_i`.
    pub fn sum_alpha(&self, d: usize, ell: usize) -> f64 {
        self.weights[..self.support()]
            .iter()
            .enumerate()
            .map(|(i, w)| alpha(i + 1, d, ell) * w)
            .sum()
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.iter().all(|&w| w >= 0.0)
    }

    /// Writes `i,w_i` rows (1-based `i`) with a header line.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.weights.len() * 20);
        out.push_str("i,w_i\n");
        for (i, w) in self.weights.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, sig12(*w)));
        }
        out
    }

    /// Reads the `i,w_i` layout written by [`WeightVector::write_csv`]. Rows
    /// must list `i = 1, 2, …, n` in order.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let table = read_numeric_table(reader, true)?;
        if table.width != 2 {
            return Err(Error::input("weight CSV must have exactly two columns: i,w_i"));
        }
        let mut weights = Vec::with_capacity(table.rows.len());
        for (pos, row) in table.rows.iter().enumerate() {
            if row[0] != (pos + 1) as f64 {
                return Err(Error::input(format!(
                    "weight CSV row {} has index {}, expected {}",
                    pos + 1,
                    row[0],
                    pos + 1
                )));
            }
            weights.push(row[1]);
        }
        // text round-trips lose digits; renormalise only what is within tolerance
        Self::custom(weights)
    }
}

/// `α_i^{(ℓ)} = i^{1+2ℓ/d} − (i−1)^{1+2ℓ/d}`, for `i ≥ 1`.
///
/// Evaluated as `i^p·(1 − (1 − 1/i)^p)` through `expm1`/`ln_1p`, which keeps
/// full relative precision at large `i` where the plain difference cancels.
pub fn alpha(i: usize, d: usize, ell: usize) -> f64 {
    debug_assert!(i >= 1 && d >= 1);
    if i == 1 || ell == 0 {
        return 1.0;
    }
    let p = 1.0 + 2.0 * ell as f64 / d as f64;
    let fi = i as f64;
    fi.powf(p) * -(p * (-1.0 / fi).ln_1p()).exp_m1()
}

/// `α_1^{(ℓ)}, …, α_k^{(ℓ)}`.
pub fn alphas(k: usize, d: usize, ell: usize) -> Vec<f64> {
    (1..=k).map(|i| alpha(i, d, ell)).collect()
}

fn check_k(k: usize, n: usize, what: &str) -> Result<()> {
    if k == 0 {
        return Err(Error::input(format!("{what} must be at least 1")));
    }
    if k > n {
        return Err(Error::input(format!("{what} = {k} exceeds n = {n}")));
    }
    Ok(())
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::input("dimension d must be at least 1"));
    }
    Ok(())
}

/// Unweighted k-nearest-neighbour weights: `1/k` on the first `k` entries.
pub fn uniform_weights(k: usize, n: usize) -> Result<WeightVector> {
    check_k(k, n, "k")?;
    let mut w = vec![0.0; n];
    w[..k].fill(1.0 / k as f64);
    WeightVector::generated(
        w,
        Scheme::UniformK,
        SchemeParams {
            k: Some(k),
            ..Default::default()
        },
    )
}

/// The asymptotically optimal non-negative profile with `k_star` positive weights:
/// `w_i = (1/k*)[1 + d/2 − d/(2 k*^{2/d}) α_i]` for `i ≤ k*`.
pub fn optimal_weights(k_star: usize, n: usize, d: usize) -> Result<WeightVector> {
    check_k(k_star, n, "k*")?;
    check_d(d)?;
    let k = k_star as f64;
    let half_d = d as f64 / 2.0;
    let scale = half_d / k.powf(2.0 / d as f64);
    let mut w = vec![0.0; n];
    for (i, wi) in w.iter_mut().enumerate().take(k_star) {
        let v = (1.0 + half_d - scale * alpha(i + 1, d, 1)) / k;
        *wi = clamp_dust(v, i)?;
    }
    WeightVector::generated(
        w,
        Scheme::Optimal,
        SchemeParams {
            k: Some(k_star),
            d: Some(d),
            ..Default::default()
        },
    )
}

fn clamp_dust(v: f64, i: usize) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v > -NEGATIVE_DUST {
        Ok(0.0)
    } else {
        Err(Error::numerical(format!(
            "weight {} is negative ({v:e}) in a non-negative scheme",
            i + 1
        )))
    }
}

/// Infinite-simulation bagged 1-NN weights, resampling `m` points with replacement:
/// `w_i = (1 − (i−1)/n)^m − (1 − i/n)^m`.
pub fn bagged_with_weights(n: usize, m: usize) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if m == 0 {
        return Err(Error::input("resample size m must be at least 1"));
    }
    let nf = n as f64;
    let mf = m as f64;
    let w: Vec<f64> = (1..=n)
        .map(|i| {
            // a^m (1 − (b/a)^m) with a = 1 − (i−1)/n, b/a = 1 − 1/(n−i+1)
            let log_a = (-((i - 1) as f64) / nf).ln_1p();
            let log_ratio = (-1.0 / (n - i + 1) as f64).ln_1p();
            (mf * log_a).exp() * -(mf * log_ratio).exp_m1()
        })
        .collect();
    WeightVector::generated(
        w,
        Scheme::BaggedWith,
        SchemeParams {
            m: Some(m),
            q: Some(mf / nf),
            ..Default::default()
        },
    )
}

/// Infinite-simulation bagged 1-NN weights, resampling `m` points without
/// replacement: `w_i = C(n−i, m−1)/C(n, m)` for `i ≤ n−m+1`, zero afterwards.
///
/// Evaluated by the ratio recurrence `w_{i+1}/w_i = (n−i−m+1)/(n−i)` from
/// `w_1 = m/n`.
pub fn bagged_without_weights(n: usize, m: usize) -> Result<WeightVector> {
    check_k(m, n, "resample size m")?;
    let mut w = vec![0.0; n];
    let last = n - m + 1;
    w[0] = m as f64 / n as f64;
    for i in 1..last {
        // i is the 1-based index of the previous entry
        w[i] = w[i - 1] * (n - i - m + 1) as f64 / (n - i) as f64;
    }
    WeightVector::generated(
        w,
        Scheme::BaggedWithout,
        SchemeParams {
            m: Some(m),
            q: Some(m as f64 / n as f64),
            ..Default::default()
        },
    )
}

/// Geometric(q) weights truncated to `{1, …, n}`:
/// `w_i = q(1−q)^{i−1}/(1 − (1−q)^n)`.
pub fn geometric_weights(n: usize, q: f64) -> Result<WeightVector> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::input(format!("q = {q} must lie in (0, 1)")));
    }
    let log_keep = (-q).ln_1p();
    let norm = -(n as f64 * log_keep).exp_m1();
    let w: Vec<f64> = (0..n)
        .map(|j| q * (j as f64 * log_keep).exp() / norm)
        .collect();
    WeightVector::generated(
        w,
        Scheme::Geometric,
        SchemeParams {
            q: Some(q),
            ..Default::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_values() {
        for d in 1..6 {
            for ell in 0..4 {
                assert_eq!(alpha(1, d, ell), 1.0);
            }
        }
        assert_relative_eq!(alpha(2, 2, 1), 3.0, max_relative = 1e-15);
        assert_relative_eq!(alpha(10, 1, 1), 271.0, max_relative = 1e-14);
        assert_eq!(alpha(7, 3, 0), 1.0);
    }

    #[test]
    fn alpha_telescopes() {
        let (k, d, ell) = (137usize, 3usize, 2usize);
        let total: f64 = alphas(k, d, ell).iter().sum();
        let expected = (k as f64).powf(1.0 + 2.0 * ell as f64 / d as f64);
        assert_relative_eq!(total, expected, max_relative = 1e-13);
    }

    #[test]
    fn alpha_is_accurate_for_large_i() {
        // exact integer arithmetic for d = 1, ℓ = 1: 3i² − 3i + 1
        let i = 3_000_000usize;
        let exact = 3.0 * (i as f64).powi(2) - 3.0 * i as f64 + 1.0;
        assert_relative_eq!(alpha(i, 1, 1), exact, max_relative = 1e-14);
    }

    #[test]
    fn optimal_two_of_four_in_two_dims() {
        let w = optimal_weights(2, 4, 2).unwrap();
        let expect = [0.75, 0.25, 0.0, 0.0];
        for (a, b) in w.as_slice().iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        assert_eq!(w.support(), 2);
    }

    #[test]
    fn optimal_rejects_bad_k() {
        assert!(matches!(optimal_weights(5, 4, 2), Err(Error::Input(_))));
        assert!(matches!(optimal_weights(0, 4, 2), Err(Error::Input(_))));
        assert!(optimal_weights(1, 1, 7).is_ok());
    }

    #[test]
    fn uniform_cases() {
        assert!(uniform_weights(6, 6).unwrap().as_slice().iter().all(|&w| w == 1.0 / 6.0));
        assert_eq!(uniform_weights(1, 3).unwrap().as_slice(), &[1.0, 0.0, 0.0]);
        assert_eq!(
            uniform_weights(4, 6).unwrap().as_slice(),
            &[0.25, 0.25, 0.25, 0.25, 0.0, 0.0]
        );
        assert!(matches!(uniform_weights(7, 6), Err(Error::Input(_))));
        assert!(matches!(uniform_weights(0, 6), Err(Error::Input(_))));
    }

    #[test]
    fn bagged_with_edge_cases() {
        let w = bagged_with_weights(9, 1).unwrap();
        for &v in w.as_slice() {
            assert_relative_eq!(v, 1.0 / 9.0, max_relative = 1e-13);
        }
        let w = bagged_with_weights(50, 200).unwrap();
        assert_relative_eq!(w.sum(), 1.0, epsilon = 1e-13);
        // last weight is (1/n)^m
        let w = bagged_with_weights(4, 3).unwrap();
        assert_relative_eq!(w.as_slice()[3], 1.0 / 64.0, max_relative = 1e-13);
        assert_relative_eq!(w.as_slice()[0], 1.0 - 27.0 / 64.0, max_relative = 1e-13);
    }

    #[test]
    fn bagged_without_matches_binomials() {
        // oracle: exact binomial ratios with small integers
        fn binom(n: u64, k: u64) -> f64 {
            (1..=k).fold(1.0, |acc, j| acc * (n - k + j) as f64 / j as f64)
        }
        let (n, m) = (12usize, 4usize);
        let w = bagged_without_weights(n, m).unwrap();
        for i in 1..=n {
            let expect = if i <= n - m + 1 {
                binom((n - i) as u64, (m - 1) as u64) / binom(n as u64, m as u64)
            } else {
                0.0
            };
            assert_relative_eq!(w.as_slice()[i - 1], expect, max_relative = 1e-13, epsilon = 1e-300);
        }
        assert_eq!(bagged_without_weights(5, 5).unwrap().as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        for &v in bagged_without_weights(7, 1).unwrap().as_slice() {
            assert_relative_eq!(v, 1.0 / 7.0, max_relative = 1e-14);
        }
        assert!(matches!(bagged_without_weights(3, 4), Err(Error::Input(_))));
    }

    #[test]
    fn bagged_without_sums_to_one_at_scale() {
        let w = bagged_without_weights(1_000_000, 10_000).unwrap();
        assert!((w.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_validation() {
        assert!(matches!(geometric_weights(5, 0.0), Err(Error::Input(_))));
        assert!(matches!(geometric_weights(5, 1.0), Err(Error::Input(_))));
        let w = geometric_weights(3, 0.5).unwrap();
        let expect = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (a, b) in w.as_slice().iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn custom_and_csv() {
        assert!(WeightVector::custom(vec![0.5, 0.4]).is_err());
        let w = optimal_weights(7, 10, 3).unwrap();
        let back = WeightVector::from_csv_reader(w.to_csv().as_bytes()).unwrap();
        assert_eq!(back.n(), 10);
        for (a, b) in back.as_slice().iter().zip(w.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(WeightVector::from_csv_reader("i,w_i\n2,1\n".as_bytes()).is_err());
    }

    #[test]
    fn scheme_names_parse() {
        for s in [
            Scheme::UniformK,
            Scheme::Optimal,
            Scheme::BaggedWith,
            Scheme::BaggedWithout,
            Scheme::Geometric,
            Scheme::HigherOrder,
            Scheme::Custom,
        ] {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
    }
}
