//! Signed weights that cancel the lower-order bias terms.
//!
//! The profile is `w_i = (1/k)(b_0 + b_1 α_i^{(1)} + … + b_r α_i^{(r)})` on
//! `i ≤ k`. With `b_0` fixed, the remaining coefficients are pinned by
//! `Σ w_i = 1` and `Σ α_i^{(ℓ)} w_i = 0` for `ℓ = 1, …, r−1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::weightgen::{alphas, clamp_dust, Scheme, SchemeParams, WeightVector};

/// How `b_1, …, b_r` are obtained from `b_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientPath {
    /// Solve the constraint system with exact finite sums `Σ α^{(ℓ1)} α^{(ℓ2)}`.
    #[default]
    Exact,
    /// Leading-order closed forms (available for `r ≤ 2`).
    ClosedForm,
}

/// Returns `(b_0, b_1, …, b_r)`.
pub fn higher_order_coefficients(
    r: usize,
    k: usize,
    b0: f64,
    d: usize,
    path: CoefficientPath,
) -> Result<Vec<f64>> {
    if r == 0 || k == 0 || d == 0 {
        return Err(Error::input("higher-order weights need r, k, d >= 1"));
    }
    if !b0.is_finite() {
        return Err(Error::input("b0 must be finite"));
    }
    match path {
        CoefficientPath::Exact => exact_coefficients(r, k, b0, d),
        CoefficientPath::ClosedForm => closed_form_coefficients(r, k, b0, d),
    }
}

fn closed_form_coefficients(r: usize, k: usize, b0: f64, d: usize) -> Result<Vec<f64>> {
    let df = d as f64;
    let k2 = (k as f64).powf(2.0 / df);
    match r {
        1 => Ok(vec![b0, (1.0 - b0) / k2]),
        2 => {
            let b1 = ((df + 4.0).powi(2) / 4.0 - 2.0 * (df + 4.0) / (df + 2.0) * b0) / k2;
            let b2 = (1.0 - b0 - k2 * b1) / (k2 * k2);
            Ok(vec![b0, b1, b2])
        }
        _ => Err(Error::Unsupported(format!(
            "closed-form coefficients are available for r <= 2, got r = {r}"
        ))),
    }
}

fn exact_coefficients(r: usize, k: usize, b0: f64, d: usize) -> Result<Vec<f64>> {
    let kf = k as f64;
    let df = d as f64;
    let table: Vec<Vec<f64>> = (0..=r).map(|ell| alphas(k, d, ell)).collect();
    let dot = |a: usize, b: usize| -> f64 {
        table[a].iter().zip(&table[b]).map(|(x, y)| x * y).sum()
    };
    // Unknowns c_ℓ = b_ℓ k^{2ℓ/d}; row ℓ' divided by k^{1+2ℓ'/d}.
    let scale = |ell: usize| kf.powf(2.0 * ell as f64 / df);
    let mut a = DMatrix::<f64>::zeros(r, r);
    let mut rhs = DVector::<f64>::zeros(r);
    for row in 0..r {
        let row_scale = kf * scale(row);
        for col in 1..=r {
            a[(row, col - 1)] = dot(row, col) / (row_scale * scale(col));
        }
        let target = if row == 0 { kf } else { 0.0 };
        rhs[row] = (target - b0 * dot(row, 0)) / row_scale;
    }
    let sv = a.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-12 * smax) {
        return Err(Error::numerical(format!(
            "constraint system for r = {r}, k = {k}, d = {d} is singular \
             (singular values {:?})",
            sv.as_slice()
        )));
    }
    let c = a.lu().solve(&rhs).ok_or_else(|| {
        Error::numerical(format!("LU solve failed for r = {r}, k = {k}, d = {d}"))
    })?;
    let mut b = Vec::with_capacity(r + 1);
    b.push(b0);
    for ell in 1..=r {
        b.push(c[ell - 1] / scale(ell));
    }
    Ok(b)
}

/// Order-`r` signed weights with `k` non-zero entries.
///
/// For `r = 1` the profile is the optimal non-negative one re-parametrised by
/// `b_0`; `b_0 = 1 + d/2` reproduces [`optimal_weights`](crate::weightgen::optimal_weights).
pub fn higher_order_weights(
    r: usize,
    k: usize,
    b0: f64,
    n: usize,
    d: usize,
    path: CoefficientPath,
) -> Result<WeightVector> {
    if k > n {
        return Err(Error::input(format!("k = {k} exceeds n = {n}")));
    }
    let b = higher_order_coefficients(r, k, b0, d, path)?;
    let table: Vec<Vec<f64>> = (1..=r).map(|ell| alphas(k, d, ell)).collect();
    let kf = k as f64;
    let mut w = vec![0.0; n];
    for (i, wi) in w.iter_mut().enumerate().take(k) {
        let mut v = b[0];
        for ell in 1..=r {
            v += b[ell] * table[ell - 1][i];
        }
        *wi = v / kf;
    }
    if r == 1 {
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = clamp_dust(*wi, i).map_err(|_| {
                Error::input(format!(
                    "b0 = {b0} gives negative first-order weights; need b0 <= 1 + d/2"
                ))
            })?;
        }
    }
    WeightVector::generated(
        w,
        Scheme::HigherOrder,
        SchemeParams {
            k: Some(k),
            r: Some(r),
            b0: Some(b0),
            d: Some(d),
            ..Default::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weightgen::optimal_weights;
    use approx::assert_relative_eq;

    #[test]
    fn first_order_reproduces_optimal_profile() {
        for d in [1, 2, 5] {
            let k = 300;
            let b0 = 1.0 + d as f64 / 2.0;
            let b = higher_order_coefficients(1, k, b0, d, CoefficientPath::Exact).unwrap();
            assert_relative_eq!(b[1], (1.0 - b0) / (k as f64).powf(2.0 / d as f64), max_relative = 1e-10);
            let w = higher_order_weights(1, k, b0, 1000, d, CoefficientPath::Exact).unwrap();
            let opt = optimal_weights(k, 1000, d).unwrap();
            for (a, o) in w.as_slice().iter().zip(opt.as_slice()) {
                assert!((a - o).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_order_residuals_in_two_dims() {
        let w = higher_order_weights(2, 500, 3.0, 2000, 2, CoefficientPath::Exact).unwrap();
        assert!((w.sum() - 1.0).abs() < 1e-8);
        assert!(w.sum_alpha(2, 1).abs() < 1e-8);
        assert!(w.min() < 0.0);
    }

    #[test]
    fn closed_form_b1_approaches_exact() {
        // both paths at the same b0; the gap shrinks with k
        for d in [1usize, 2, 3] {
            let b0 = 1.0 + d as f64 / 2.0;
            let gaps: Vec<f64> = [1000usize, 10_000]
                .iter()
                .map(|&k| {
                    let e = higher_order_coefficients(2, k, b0, d, CoefficientPath::Exact).unwrap();
                    let c = higher_order_coefficients(2, k, b0, d, CoefficientPath::ClosedForm).unwrap();
                    (c[1] / e[1] - 1.0).abs()
                })
                .collect();
            assert!(gaps[1] < gaps[0] / 10.0, "d={d}: {gaps:?}");
        }
    }

    #[test]
    fn closed_form_sums_to_one() {
        let w = higher_order_weights(2, 800, 2.0, 1000, 3, CoefficientPath::ClosedForm).unwrap();
        assert!((w.sum() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn singular_system_is_reported() {
        let err = higher_order_coefficients(3, 2, 1.0, 2, CoefficientPath::Exact).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
        assert!(matches!(
            higher_order_coefficients(3, 100, 1.0, 2, CoefficientPath::ClosedForm),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn third_order_exact_path() {
        let w = higher_order_weights(3, 2000, 2.5, 5000, 2, CoefficientPath::Exact).unwrap();
        assert!((w.sum() - 1.0).abs() < 1e-10);
        let scale1 = (2000f64).powf(2.0 / 2.0);
        let scale2 = (2000f64).powf(4.0 / 2.0);
        assert!(w.sum_alpha(2, 1).abs() / scale1 < 1e-10);
        assert!(w.sum_alpha(2, 2).abs() / scale2 < 1e-10);
    }

    #[test]
    fn first_order_rejects_large_b0() {
        assert!(matches!(
            higher_order_weights(1, 50, 10.0, 100, 2, CoefficientPath::Exact),
            Err(Error::Input(_))
        ));
    }
}
