//! The Bayes decision boundary `S = {x ∈ R : η(x) = 1/2}` for the supported
//! geometries: a finite point set on the line, or a hyperplane for two
//! isotropic Gaussians with a common variance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::popmodel::{PopulationModel, TRUNCATION_TAIL};
use crate::region::BoxRegion;

pub(crate) const GRID_CELLS: usize = 20_000;
const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionSet {
    /// Crossing points inside the region, increasing.
    Points { points: Vec<f64> },
    /// `{x : normal·x = offset}` with a unit normal pointing toward class 1.
    Hyperplane { normal: Vec<f64>, offset: f64 },
}

/// Finite part of the region used for searching and integrating.
pub(crate) fn working_box(pop: &PopulationModel) -> BoxRegion {
    let region = pop.region();
    if region.is_bounded() {
        return region.clone();
    }
    let mass = pop.mass_box(TRUNCATION_TAIL);
    let lower = region
        .lower()
        .iter()
        .zip(mass.lower())
        .map(|(a, b)| a.max(*b))
        .collect();
    let upper = region
        .upper()
        .iter()
        .zip(mass.upper())
        .map(|(a, b)| a.min(*b))
        .collect();
    BoxRegion::new(lower, upper).unwrap_or(mass)
}

/// Whether both classes are one isotropic Gaussian with the same variance.
pub(crate) fn hyperplane_family(pop: &PopulationModel) -> bool {
    pop.class1().len() == 1
        && pop.class2().len() == 1
        && pop.class1()[0].variance == pop.class2()[0].variance
}

pub fn decision_set(pop: &PopulationModel) -> Result<DecisionSet> {
    if !(pop.prior() > 0.0 && pop.prior() < 1.0) {
        return Err(Error::input(format!(
            "decision set is empty: prior {} leaves one class without mass",
            pop.prior()
        )));
    }
    if pop.dim() == 1 {
        return crossing_points(pop).map(|points| DecisionSet::Points { points });
    }
    if !hyperplane_family(pop) {
        return Err(Error::Unsupported(
            "in d >= 2 only two isotropic Gaussians with equal variance are supported".into(),
        ));
    }
    let (c1, c2) = (&pop.class1()[0], &pop.class2()[0]);
    let diff: Vec<f64> = c1.mean.iter().zip(&c2.mean).map(|(a, b)| a - b).collect();
    let len = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len == 0.0 {
        return Err(Error::input(
            "decision set is empty: class means coincide, so η is constant",
        ));
    }
    let sq = |m: &[f64]| m.iter().map(|v| v * v).sum::<f64>();
    let pi = pop.prior();
    let offset = (0.5 * (sq(&c1.mean) - sq(&c2.mean)) - c1.variance * (pi / (1.0 - pi)).ln()) / len;
    let normal: Vec<f64> = diff.iter().map(|v| v / len).collect();
    if !hyperplane_meets_box(&normal, offset, &working_box(pop)) {
        return Err(Error::input("decision set is empty: the hyperplane misses the region"));
    }
    Ok(DecisionSet::Hyperplane { normal, offset })
}

fn hyperplane_meets_box(normal: &[f64], offset: f64, region: &BoxRegion) -> bool {
    let (mut lo, mut hi) = (0.0, 0.0);
    for (v, (a, b)) in normal.iter().zip(region.lower().iter().zip(region.upper())) {
        lo += (v * a).min(v * b);
        hi += (v * a).max(v * b);
    }
    lo <= offset && offset <= hi
}

fn crossing_points(pop: &PopulationModel) -> Result<Vec<f64>> {
    let b = working_box(pop);
    let (lo, hi) = (b.lower()[0], b.upper()[0]);
    let psi = |x: f64| pop.log_odds(&[x]);
    let step = (hi - lo) / GRID_CELLS as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = psi(x0);
    if f0 == 0.0 {
        roots.push(x0);
    }
    for i in 1..=GRID_CELLS {
        let x1 = if i == GRID_CELLS { hi } else { lo + i as f64 * step };
        let f1 = psi(x1);
        if f1 == 0.0 {
            roots.push(x1);
        } else if f0 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
            roots.push(bisect(&psi, x0, x1, f0));
        }
        x0 = x1;
        f0 = f1;
    }
    if roots.is_empty() {
        return Err(Error::input(format!(
            "decision set is empty: η − 1/2 has no sign change on [{lo}, {hi}]"
        )));
    }
    Ok(roots)
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    while b - a > ROOT_TOL {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popmodel::Component;

    #[test]
    fn symmetric_pair_crosses_at_midpoint() {
        let pop = PopulationModel::gaussian_pair_1d(0.5, (0.0, 1.0), (2.0, 1.0)).unwrap();
        match decision_set(&pop).unwrap() {
            DecisionSet::Points { points } => {
                assert_eq!(points.len(), 1);
                assert!((points[0] - 1.0).abs() < 1e-11);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unequal_variances_match_quadratic_roots() {
        // ln(π φ(x;0,1)) = ln((1−π) φ(x;1,4)) is quadratic in x
        let (pi, m2, v2) = (0.4f64, 1.0f64, 4.0f64);
        let pop = PopulationModel::gaussian_pair_1d(pi, (0.0, 1.0), (m2, v2)).unwrap();
        let a = -0.5 + 1.0 / (2.0 * v2);
        let b = -m2 / v2;
        let c = m2 * m2 / (2.0 * v2) + (pi / (1.0 - pi)).ln() + 0.5 * v2.ln();
        let disc = (b * b - 4.0 * a * c).sqrt();
        let mut want = [(-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a)];
        want.sort_by(f64::total_cmp);
        let DecisionSet::Points { points } = decision_set(&pop).unwrap() else {
            panic!("expected points");
        };
        assert_eq!(points.len(), 2);
        for (p, w) in points.iter().zip(want) {
            assert!((p - w).abs() < 1e-9, "{p} vs {w}");
        }
    }

    #[test]
    fn shifted_isotropic_pair_gives_midpoint_hyperplane() {
        let mu = vec![1.0, -2.0, 0.5];
        let pop = PopulationModel::isotropic_pair(0.5, mu.clone(), vec![0.0; 3], 1.0).unwrap();
        let DecisionSet::Hyperplane { normal, offset } = decision_set(&pop).unwrap() else {
            panic!("expected hyperplane");
        };
        let len = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (n, m) in normal.iter().zip(&mu) {
            assert!((n - m / len).abs() < 1e-14);
        }
        let half: Vec<f64> = mu.iter().map(|v| v / 2.0).collect();
        let at_half: f64 = normal.iter().zip(&half).map(|(a, b)| a * b).sum();
        assert!((at_half - offset).abs() < 1e-12);
        assert!((pop.eta(&half).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn empty_and_unsupported_cases() {
        let same = PopulationModel::gaussian_pair_1d(0.3, (0.0, 1.0), (0.0, 1.0)).unwrap();
        assert!(matches!(decision_set(&same), Err(Error::Input(_))));
        let one = PopulationModel::gaussian_pair_1d(1.0, (0.0, 1.0), (2.0, 1.0)).unwrap();
        assert!(decision_set(&one).is_err());
        let curved = PopulationModel::new(
            0.5,
            vec![Component::new(vec![0.0, 0.0], 1.0, 1.0)],
            vec![Component::new(vec![1.0, 0.0], 2.0, 1.0)],
            None,
        )
        .unwrap();
        assert!(matches!(decision_set(&curved), Err(Error::Unsupported(_))));
    }
}
