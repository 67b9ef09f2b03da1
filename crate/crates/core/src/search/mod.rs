//! Distance ordering of a training sample around a query point.
//!
//! Both search paths sort by the pair `(distance key, original index)`, so
//! equal distances always resolve to the lower index first. Under the
//! Euclidean norm the key is the *squared* distance: taking a square root can
//! merge two distinct keys into one double and change the tie structure.

mod kdtree;

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

pub use kdtree::{KdTree, NearestIter};

/// The norm used both for neighbour ordering and for the unit-ball volume
/// `a_d` that enters the bias constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormSpec {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl NormSpec {
    /// Monotone surrogate of `‖a − b‖` used for ordering.
    #[inline]
    pub fn key(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            NormSpec::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let t = x - y;
                    t * t
                })
                .sum(),
            NormSpec::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            NormSpec::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }

    /// `‖a − b‖` itself.
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            NormSpec::Euclidean => self.key(a, b).sqrt(),
            _ => self.key(a, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormSpec::Euclidean => "euclidean",
            NormSpec::Manhattan => "manhattan",
            NormSpec::Chebyshev => "chebyshev",
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(NormSpec::Euclidean),
            "manhattan" | "l1" => Ok(NormSpec::Manhattan),
            "chebyshev" | "linf" | "max" => Ok(NormSpec::Chebyshev),
            other => Err(Error::input(format!("unknown norm '{other}'"))),
        }
    }
}

#[inline]
pub(crate) fn cmp_keyed(a: (f64, usize), b: (f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

fn check_query(data: &LabeledDataset, query: &[f64]) -> Result<()> {
    if query.len() != data.dim() {
        return Err(Error::input(format!(
            "query has dimension {}, dataset has {}",
            query.len(),
            data.dim()
        )));
    }
    Ok(())
}

/// Full distance-ordered permutation (0-based indices) of the training points.
pub fn order_by_distance(data: &LabeledDataset, query: &[f64], norm: NormSpec) -> Result<Vec<usize>> {
    nearest_prefix(data, query, norm, data.len())
}

/// The first `k` entries of [`order_by_distance`], computed with a partial
/// selection instead of a full sort.
pub fn nearest_prefix(
    data: &LabeledDataset,
    query: &[f64],
    norm: NormSpec,
    k: usize,
) -> Result<Vec<usize>> {
    check_query(data, query)?;
    let mut keyed: Vec<(f64, usize)> = data
        .points()
        .enumerate()
        .map(|(i, p)| (norm.key(p, query), i))
        .collect();
    let k = k.min(keyed.len());
    if k == 0 {
        return Ok(Vec::new());
    }
    if k < keyed.len() {
        keyed.select_nth_unstable_by(k - 1, |a, b| cmp_keyed(*a, *b));
        keyed.truncate(k);
    }
    keyed.sort_unstable_by(|a, b| cmp_keyed(*a, *b));
    Ok(keyed.into_iter().map(|(_, i)| i).collect())
}

/// Kd-tree ordering; identical output to [`order_by_distance`].
///
/// Builds a throwaway tree. Callers issuing many queries against the same
/// data should build a [`KdTree`] once and call [`KdTree::order`].
pub fn kd_order(data: &LabeledDataset, query: &[f64], norm: NormSpec) -> Result<Vec<usize>> {
    if norm != NormSpec::Euclidean {
        return Err(Error::Unsupported(format!(
            "kd-tree search supports only the Euclidean norm, got {norm}"
        )));
    }
    check_query(data, query)?;
    Ok(KdTree::build(data).order(query))
}

/// Lebesgue measure `a_d` of the unit ball of `norm` in `d` dimensions.
pub fn unit_ball_volume(d: usize, norm: NormSpec) -> f64 {
    let df = d as f64;
    match norm {
        NormSpec::Euclidean => {
            (0.5 * df * PI.ln() - ln_gamma(0.5 * df + 1.0)).exp()
        }
        NormSpec::Chebyshev => 2f64.powi(d as i32),
        NormSpec::Manhattan => (df * 2f64.ln() - ln_gamma(df + 1.0)).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(points: &[f64]) -> LabeledDataset {
        let labels = vec![1; points.len()];
        LabeledDataset::from_flat(1, points.to_vec(), labels).unwrap()
    }

    #[test]
    fn orders_points_on_a_line() {
        let data = line(&[0.0, 2.0, 1.0]);
        assert_eq!(order_by_distance(&data, &[0.9], NormSpec::Euclidean).unwrap(), vec![2, 0, 1]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let data = line(&[2.0, 0.0, 1.0, 2.0]);
        for norm in [NormSpec::Euclidean, NormSpec::Manhattan, NormSpec::Chebyshev] {
            assert_eq!(order_by_distance(&data, &[1.0], norm).unwrap(), vec![2, 0, 1, 3]);
        }
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let data = line(&[0.0, 1.0]);
        assert!(matches!(
            order_by_distance(&data, &[0.0, 0.0], NormSpec::Euclidean),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn matches_independent_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coords: Vec<f64> = (0..600).map(|_| rng.random_range(-1.0..1.0)).collect();
        let data = LabeledDataset::from_flat(3, coords, vec![1; 200]).unwrap();
        let q = [0.1, -0.2, 0.3];
        let got = order_by_distance(&data, &q, NormSpec::Euclidean).unwrap();
        // oracle: sort by the square-rooted distance with an explicit index tiebreak
        let mut oracle: Vec<usize> = (0..200).collect();
        oracle.sort_by(|&a, &b| {
            let da: f64 = data.point(a).iter().zip(&q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let db: f64 = data.point(b).iter().zip(&q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        });
        assert_eq!(got, oracle);
    }

    #[test]
    fn prefix_agrees_with_full_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coords: Vec<f64> = (0..300).map(|_| (rng.random_range(0..5) as f64) * 0.5).collect();
        let data = LabeledDataset::from_flat(2, coords, vec![1; 150]).unwrap();
        for norm in [NormSpec::Euclidean, NormSpec::Manhattan, NormSpec::Chebyshev] {
            let full = order_by_distance(&data, &[1.0, 1.0], norm).unwrap();
            for k in [1, 7, 50, 150, 400] {
                let pre = nearest_prefix(&data, &[1.0, 1.0], norm, k).unwrap();
                assert_eq!(pre, full[..k.min(150)]);
            }
        }
    }

    #[test]
    fn kd_rejects_other_norms() {
        let data = line(&[0.0, 1.0]);
        assert!(matches!(
            kd_order(&data, &[0.0], NormSpec::Manhattan),
            Err(Error::Unsupported(_))
        ));
        assert_eq!(kd_order(&line(&[4.0]), &[0.0], NormSpec::Euclidean).unwrap(), vec![0]);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1, NormSpec::Euclidean) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2, NormSpec::Euclidean) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3, NormSpec::Euclidean) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((unit_ball_volume(3, NormSpec::Manhattan) - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(unit_ball_volume(4, NormSpec::Chebyshev), 16.0);
        for norm in [NormSpec::Euclidean, NormSpec::Manhattan, NormSpec::Chebyshev] {
            assert!((unit_ball_volume(1, norm) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn norm_names_parse() {
        for norm in [NormSpec::Euclidean, NormSpec::Manhattan, NormSpec::Chebyshev] {
            assert_eq!(norm.name().parse::<NormSpec>().unwrap(), norm);
        }
        assert!("l3".parse::<NormSpec>().is_err());
    }
}
