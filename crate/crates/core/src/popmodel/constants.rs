//! Bayes risk and the boundary integrals `B1`, `B2`, `B2^{(r)}`.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::popmodel::boundary::{decision_set, working_box, DecisionSet};
use crate::popmodel::quadrature::{integrate_pieces, integrate_tol, qmc_box, Estimate, QmcOptions};
use crate::popmodel::PopulationModel;
use crate::region::BoxRegion;
use crate::search::NormSpec;
use crate::weightgen::asymptotics::{
    asymp_regret_constant, gamma_limit_at_k_star, k_opt, k_star, q_opt, KStar, QOpt,
};

/// Below this `‖∇η‖` on `S` the boundary is treated as degenerate.
pub const MIN_GRADIENT: f64 = 1e-10;
/// `B2` is reported as zero when `B2 ≤ B2_ZERO_RATIO · B1`.
pub const B2_ZERO_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantOptions {
    /// Absolute and relative tolerances for one-dimensional boundary quadrature.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub qmc: QmcOptions,
}

impl Default for ConstantOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            qmc: QmcOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskOptions {
    pub abs_tol: f64,
    pub qmc: QmcOptions,
    /// Quasi-Monte Carlo fails when its standard error exceeds this fraction
    /// of the estimate.
    pub qmc_rel_tol: f64,
}

impl Default for RiskOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            qmc: QmcOptions::default(),
            qmc_rel_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticConstants {
    pub d: usize,
    pub n: usize,
    pub norm: String,
    pub b1: f64,
    pub b1_error: f64,
    pub b2: f64,
    pub b2_error: f64,
    /// Set when `B2` vanishes; the fields below are then `None`.
    pub b2_zero: bool,
    pub k_star: Option<KStar>,
    pub k_opt: Option<KStar>,
    pub q_opt: Option<QOpt>,
    pub regret_constant: Option<f64>,
    /// Limit of `n^{4/(d+4)} γ_n(w*)`.
    pub gamma_limit: Option<f64>,
    pub boundary: DecisionSet,
}

impl AsymptoticConstants {
    /// Fails with a configuration error when `B2 = 0`.
    pub fn require_b2(&self) -> Result<()> {
        if self.b2_zero {
            Err(Error::config(format!(
                "B2 = {} is zero for this population; k*, q_opt and the optimal schemes are undefined",
                self.b2
            )))
        } else {
            Ok(())
        }
    }
}

pub fn compute_constants(pop: &PopulationModel, norm: NormSpec, n: usize) -> Result<AsymptoticConstants> {
    compute_constants_with(pop, norm, n, ConstantOptions::default())
}

pub fn compute_constants_with(
    pop: &PopulationModel,
    norm: NormSpec,
    n: usize,
    opts: ConstantOptions,
) -> Result<AsymptoticConstants> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    let boundary = decision_set(pop)?;
    let d = pop.dim();
    let b1 = boundary_integral(pop, &boundary, opts, |x| {
        let (f, g) = density_and_gradient(pop, x)?;
        Ok(f / (4.0 * g))
    })?;
    let b2 = boundary_integral(pop, &boundary, opts, |x| {
        let (f, g) = density_and_gradient(pop, x)?;
        let a = pop.a_of_x(x, norm)?;
        Ok(f * a * a / g)
    })?;
    if !(b1.value > 0.0) {
        return Err(Error::numerical(format!(
            "B1 = {} is not positive; the boundary carries no mass inside the region",
            b1.value
        )));
    }
    let b2_zero = b2.value <= B2_ZERO_RATIO * b1.value;
    let (k_star_v, k_opt_v, q_opt_v, regret, limit) = if b2_zero {
        (None, None, None, None, None)
    } else {
        (
            Some(k_star(b1.value, b2.value, d, n)?),
            Some(k_opt(b1.value, b2.value, d, n)?),
            Some(q_opt(b1.value, b2.value, d, n)?),
            Some(asymp_regret_constant(b1.value, b2.value, d)?),
            Some(gamma_limit_at_k_star(b1.value, b2.value, d)?),
        )
    };
    Ok(AsymptoticConstants {
        d,
        n,
        norm: norm.name().to_string(),
        b1: b1.value,
        b1_error: b1.error,
        b2: b2.value,
        b2_error: b2.error,
        b2_zero,
        k_star: k_star_v,
        k_opt: k_opt_v,
        q_opt: q_opt_v,
        regret_constant: regret,
        gamma_limit: limit,
        boundary,
    })
}

/// `B2^{(r)} = ∫_S f̄ a^{(r)}² / ‖∇η‖` (Euclidean norm).
pub fn compute_b2_r(pop: &PopulationModel, r: usize, opts: ConstantOptions) -> Result<Estimate> {
    let boundary = decision_set(pop)?;
    boundary_integral(pop, &boundary, opts, |x| {
        let (f, g) = density_and_gradient(pop, x)?;
        let a = pop.a_r_of_x(x, r)?;
        Ok(f * a * a / g)
    })
}

fn density_and_gradient(pop: &PopulationModel, x: &[f64]) -> Result<(f64, f64)> {
    let g = pop.eta_derivatives(x)?.gradient_norm();
    if g < MIN_GRADIENT {
        return Err(Error::numerical(format!(
            "|grad eta| = {g:e} at boundary point {x:?}; the boundary is degenerate"
        )));
    }
    Ok((pop.fbar(x)?, g))
}

/// `∫_{S ∩ R} h dVol^{d−1}`.
fn boundary_integral<H>(
    pop: &PopulationModel,
    boundary: &DecisionSet,
    opts: ConstantOptions,
    h: H,
) -> Result<Estimate>
where
    H: Fn(&[f64]) -> Result<f64>,
{
    let region = working_box(pop);
    match boundary {
        DecisionSet::Points { points } => {
            let mut value = 0.0;
            for &p in points.iter().filter(|p| region.contains(&[**p])) {
                value += h(&[p])?;
            }
            Ok(Estimate { value, error: 0.0 })
        }
        DecisionSet::Hyperplane { normal, offset } => {
            hyperplane_integral(normal, *offset, &region, opts, h)
        }
    }
}

fn hyperplane_integral<H>(
    normal: &[f64],
    offset: f64,
    region: &BoxRegion,
    opts: ConstantOptions,
    h: H,
) -> Result<Estimate>
where
    H: Fn(&[f64]) -> Result<f64>,
{
    let d = normal.len();
    // solve for the axis with the largest normal component
    let j = (0..d)
        .max_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()))
        .expect("d >= 1");
    let others: Vec<usize> = (0..d).filter(|&i| i != j).collect();
    let (lo_j, hi_j) = (region.lower()[j], region.upper()[j]);
    let jac = 1.0 / normal[j].abs();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let lift = |y: &[f64]| -> Option<Vec<f64>> {
        let mut x = vec![0.0; d];
        let mut acc = offset;
        for (&i, &v) in others.iter().zip(y) {
            x[i] = v;
            acc -= normal[i] * v;
        }
        x[j] = acc / normal[j];
        (lo_j <= x[j] && x[j] <= hi_j).then_some(x)
    };
    let eval = |y: &[f64]| -> f64 {
        match lift(y) {
            None => 0.0,
            Some(x) => match h(&x) {
                Ok(v) => v * jac,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
        }
    };
    let result = if d == 2 {
        let o = others[0];
        let (mut a, mut b) = (region.lower()[o], region.upper()[o]);
        if normal[o] != 0.0 {
            let y1 = (offset - normal[j] * lo_j) / normal[o];
            let y2 = (offset - normal[j] * hi_j) / normal[o];
            a = a.max(y1.min(y2));
            b = b.min(y1.max(y2));
        }
        if a >= b {
            Estimate { value: 0.0, error: 0.0 }
        } else {
            integrate_tol(|t| eval(&[t]), a, b, opts.abs_tol, opts.rel_tol)?
        }
    } else {
        let lower: Vec<f64> = others.iter().map(|&i| region.lower()[i]).collect();
        let upper: Vec<f64> = others.iter().map(|&i| region.upper()[i]).collect();
        qmc_box(eval, &lower, &upper, opts.qmc)?
    };
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

pub fn bayes_risk(pop: &PopulationModel) -> Result<Estimate> {
    bayes_risk_with(pop, RiskOptions::default())
}

/// `∫_R min(π f1, (1−π) f2)`: adaptive G-K split at the crossings for `d = 1`,
/// randomized quasi-Monte Carlo otherwise.
pub fn bayes_risk_with(pop: &PopulationModel, opts: RiskOptions) -> Result<Estimate> {
    let region = working_box(pop);
    let integrand = |x: &[f64]| {
        let (a, b) = pop.class_densities(x);
        a.min(b)
    };
    if pop.dim() == 1 {
        let (lo, hi) = (region.lower()[0], region.upper()[0]);
        let mut breaks = vec![lo];
        if let Ok(DecisionSet::Points { points }) = decision_set(pop) {
            breaks.extend(points.into_iter().filter(|p| *p > lo && *p < hi));
        }
        breaks.push(hi);
        return integrate_pieces(|t| integrand(&[t]), &breaks, opts.abs_tol);
    }
    let est = qmc_box(integrand, region.lower(), region.upper(), opts.qmc)?;
    if est.error > opts.qmc_rel_tol * est.value.abs() + opts.abs_tol {
        return Err(Error::numerical(format!(
            "Bayes risk estimate {} has standard error {} above tolerance",
            est.value, est.error
        )));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};

    fn std_normal() -> Normal {
        Normal::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn symmetric_line_model() {
        let pop = PopulationModel::gaussian_pair_1d(0.5, (0.0, 1.0), (2.0, 1.0)).unwrap();
        let risk = bayes_risk(&pop).unwrap();
        assert!((risk.value - std_normal().cdf(-1.0)).abs() < 1e-7);
        let c = compute_constants(&pop, NormSpec::Euclidean, 1000).unwrap();
        assert!((c.b1 - std_normal().pdf(1.0) / 2.0).abs() < 1e-12);
        // f̄'(1) = 0 and η''(1) = 0 at the symmetric crossing
        assert!(c.b2_zero);
        assert!(c.k_star.is_none());
        assert!(c.require_b2().is_err());
    }

    #[test]
    fn identical_classes_risk_is_min_prior() {
        let pop = PopulationModel::gaussian_pair_1d(0.3, (1.0, 2.0), (1.0, 2.0)).unwrap();
        let risk = bayes_risk(&pop).unwrap();
        assert!((risk.value - 0.3).abs() < 1e-7);
        let one = PopulationModel::gaussian_pair_1d(1.0, (0.0, 1.0), (2.0, 1.0)).unwrap();
        assert!(bayes_risk(&one).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn asymmetric_prior_gives_positive_b2() {
        let pop = PopulationModel::gaussian_pair_1d(0.7, (0.0, 1.0), (2.0, 1.0)).unwrap();
        let c = compute_constants(&pop, NormSpec::Euclidean, 2000).unwrap();
        assert!(!c.b2_zero && c.b2 > 0.0);
        let ks = c.k_star.unwrap();
        assert!(ks.k >= 1 && !ks.clamped);
    }

    #[test]
    fn label_swap_leaves_constants_unchanged() {
        for pop in [
            PopulationModel::gaussian_pair_1d(0.35, (0.0, 1.0), (1.5, 2.0)).unwrap(),
            PopulationModel::isotropic_pair(0.6, vec![1.0, 0.0], vec![-0.5, 0.5], 1.0).unwrap(),
        ] {
            let a = compute_constants(&pop, NormSpec::Euclidean, 1000).unwrap();
            let b = compute_constants(&pop.swapped(), NormSpec::Euclidean, 1000).unwrap();
            assert!((a.b1 / b.b1 - 1.0).abs() < 1e-9, "{} vs {}", a.b1, b.b1);
            assert!((a.b2 / b.b2 - 1.0).abs() < 1e-9, "{} vs {}", a.b2, b.b2);
        }
    }

    #[test]
    fn k_star_is_scale_free() {
        let pop = PopulationModel::gaussian_pair_1d(0.3, (0.0, 1.0), (1.0, 0.5)).unwrap();
        let base = compute_constants(&pop, NormSpec::Euclidean, 5000).unwrap();
        for c in [0.1, 3.0, 40.0] {
            let s = compute_constants(&pop.scaled(c), NormSpec::Euclidean, 5000).unwrap();
            assert_eq!(s.k_star.unwrap().k, base.k_star.unwrap().k);
            assert!((s.k_star.unwrap().raw / base.k_star.unwrap().raw - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn two_dim_hyperplane_matches_closed_form() {
        // equal-variance pair: along the normal the model is a 1-d pair, the
        // orthogonal direction integrates a standard normal to 1
        let (pi, delta) = (0.65, 2.0);
        let pop2 = PopulationModel::isotropic_pair(pi, vec![delta, 0.0], vec![0.0, 0.0], 1.0).unwrap();
        let pop1 = PopulationModel::gaussian_pair_1d(pi, (delta, 1.0), (0.0, 1.0)).unwrap();
        let c2 = compute_constants(&pop2, NormSpec::Euclidean, 1000).unwrap();
        let c1 = compute_constants(&pop1, NormSpec::Euclidean, 1000).unwrap();
        assert!((c2.b1 / c1.b1 - 1.0).abs() < 1e-6, "{} vs {}", c2.b1, c1.b1);
        assert!(c2.b2 > 0.0);
    }

    #[test]
    fn three_dim_qmc_matches_rotated_two_dim() {
        let pi = 0.6;
        let pop3 = PopulationModel::isotropic_pair(pi, vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let c = compute_constants(&pop3, NormSpec::Euclidean, 1000).unwrap();
        let line = PopulationModel::gaussian_pair_1d(pi, (2f64.sqrt(), 1.0), (0.0, 1.0)).unwrap();
        let l = compute_constants(&line, NormSpec::Euclidean, 1000).unwrap();
        assert!((c.b1 - l.b1).abs() < 5.0 * c.b1_error + 1e-4 * l.b1, "{} ± {} vs {}", c.b1, c.b1_error, l.b1);
    }

    #[test]
    fn bayes_risk_two_dims_matches_projection() {
        let pi = 0.4;
        let pop = PopulationModel::isotropic_pair(pi, vec![1.0, 1.0], vec![-1.0, 0.0], 1.0).unwrap();
        let line = PopulationModel::gaussian_pair_1d(pi, (5f64.sqrt(), 1.0), (0.0, 1.0)).unwrap();
        let r2 = bayes_risk(&pop).unwrap();
        let r1 = bayes_risk(&line).unwrap();
        assert!((r2.value - r1.value).abs() < 5.0 * r2.error + 1e-6, "{r2:?} vs {r1:?}");
    }

    #[test]
    fn degenerate_gradient_is_numerical_error() {
        // means 1e-12 apart: |η′| ≈ 2.5e-13 everywhere
        let pop = PopulationModel::gaussian_pair_1d(0.5, (0.0, 1.0), (1e-12, 1.0)).unwrap();
        let err = density_and_gradient(&pop, &[0.0]);
        assert!(matches!(err, Err(Error::Numerical(_))));
    }
}
