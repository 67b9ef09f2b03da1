//! Weighted nearest-neighbour classification and empirical risk.
//!
//! A query's neighbours are ranked by distance (ties to the lower training
//! index) and the `i`-th nearest contributes `w_i` to its class total. The
//! label is the class with the largest total, ties going to the lower class
//! index. With two classes this is the rule "class 1 iff `Σ w_i 1{Y_(i)=1} ≥ 1/2`"
//! whenever the weights sum to one.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::region::BoxRegion;
use crate::search::{nearest_prefix, KdTree, NormSpec};
use crate::weightgen::WeightVector;

/// Weight mass beyond which the neighbour list is truncated.
const TAIL_MASS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    /// 1-based class label.
    pub label: usize,
    /// Weighted vote total per class; entry `c − 1` belongs to class `c`.
    pub vote_scores: Vec<f64>,
}

/// Class with the largest score, ties to the lowest index (1-based).
pub fn decide(scores: &[f64]) -> usize {
    let mut best = 0;
    for (c, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = c;
        }
    }
    best + 1
}

/// Class totals for neighbours listed in distance order.
pub fn vote_scores(data: &LabeledDataset, order: &[usize], weights: &[f64]) -> Vec<f64> {
    let mut scores = vec![0.0; data.classes()];
    for (&idx, &w) in order.iter().zip(weights) {
        scores[data.label(idx) - 1] += w;
    }
    scores
}

/// Smallest prefix length whose complement carries at most `TAIL_MASS` of
/// absolute weight, together with that tail mass.
pub(crate) fn effective_support(w: &[f64]) -> (usize, f64) {
    let mut tail = 0.0;
    let mut k = w.len();
    while k > 0 {
        let next = tail + w[k - 1].abs();
        if next > TAIL_MASS {
            break;
        }
        tail = next;
        k -= 1;
    }
    (k, tail)
}

pub(crate) fn margin(scores: &[f64]) -> f64 {
    let mut top = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &s in scores {
        if s > top {
            second = top;
            top = s;
        } else if s > second {
            second = s;
        }
    }
    top - second
}

/// Classifies one query with brute-force neighbour ordering.
pub fn classify(
    data: &LabeledDataset,
    query: &[f64],
    w: &WeightVector,
    norm: NormSpec,
) -> Result<ClassificationResult> {
    WeightedNnClassifier::brute(data, w, norm)?.predict(query)
}

enum Neighbours {
    Kd(KdTree),
    Brute(NormSpec),
}

/// A training set with a weight vector, ready for repeated queries.
pub struct WeightedNnClassifier<'a> {
    data: &'a LabeledDataset,
    weights: &'a [f64],
    support: usize,
    tail: f64,
    search: Neighbours,
}

impl<'a> WeightedNnClassifier<'a> {
    /// Uses a kd-tree for the Euclidean norm and brute force otherwise.
    pub fn new(data: &'a LabeledDataset, w: &'a WeightVector, norm: NormSpec) -> Result<Self> {
        let mut c = Self::brute(data, w, norm)?;
        if norm == NormSpec::Euclidean {
            c.search = Neighbours::Kd(KdTree::build(data));
        }
        Ok(c)
    }

    pub fn brute(data: &'a LabeledDataset, w: &'a WeightVector, norm: NormSpec) -> Result<Self> {
        if w.n() != data.len() {
            return Err(Error::input(format!(
                "weight vector has length {}, training set has {} points",
                w.n(),
                data.len()
            )));
        }
        let (support, tail) = effective_support(w.as_slice());
        Ok(Self {
            data,
            weights: w.as_slice(),
            support,
            tail,
            search: Neighbours::Brute(norm),
        })
    }

    fn neighbours(&self, query: &[f64], k: usize) -> Result<Vec<usize>> {
        match &self.search {
            Neighbours::Kd(tree) => {
                if query.len() != self.data.dim() {
                    return Err(Error::input(format!(
                        "query has dimension {}, dataset has {}",
                        query.len(),
                        self.data.dim()
                    )));
                }
                Ok(tree.nearest(query, k))
            }
            Neighbours::Brute(norm) => nearest_prefix(self.data, query, *norm, k),
        }
    }

    pub fn predict(&self, query: &[f64]) -> Result<ClassificationResult> {
        let order = self.neighbours(query, self.support)?;
        let mut scores = vote_scores(self.data, &order, self.weights);
        if self.tail > 0.0 && margin(&scores) <= 2.0 * self.tail {
            // the truncated tail could still decide the vote
            let full = self.neighbours(query, self.data.len())?;
            scores = vote_scores(self.data, &full, self.weights);
        }
        Ok(ClassificationResult {
            label: decide(&scores),
            vote_scores: scores,
        })
    }

    /// Classifies every point of `queries` in parallel; results keep input order.
    pub fn predict_batch(&self, queries: &LabeledDataset) -> Result<Vec<ClassificationResult>>
    where
        Self: Sync,
    {
        (0..queries.len())
            .into_par_iter()
            .map(|i| self.predict(queries.point(i)))
            .collect()
    }
}

/// Fraction of test pairs misclassified with the test point inside `region`
/// (points outside count as correct). `None` means the whole space.
pub fn empirical_risk(
    data: &LabeledDataset,
    test: &LabeledDataset,
    w: &WeightVector,
    norm: NormSpec,
    region: Option<&BoxRegion>,
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::input("test set is empty"));
    }
    let clf = WeightedNnClassifier::new(data, w, norm)?;
    let preds = clf.predict_batch(test)?;
    let errors = preds
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            p.label != test.label(*i) && region.is_none_or(|r| r.contains(test.point(*i)))
        })
        .count();
    Ok(errors as f64 / test.len() as f64)
}

/// Writes `row,label,score_1,…,score_K` with 1-based rows.
pub fn write_predictions<W: Write + ?Sized>(out: &mut W, results: &[ClassificationResult]) -> Result<()> {
    let classes = results.first().map_or(0, |r| r.vote_scores.len());
    let mut header = String::from("row,label");
    for c in 1..=classes {
        header.push_str(&format!(",score_{c}"));
    }
    writeln!(out, "{header}")?;
    for (i, r) in results.iter().enumerate() {
        let scores: Vec<String> = r.vote_scores.iter().map(|s| sig12(*s)).collect();
        writeln!(out, "{},{},{}", i + 1, r.label, scores.join(","))?;
    }
    Ok(())
}

pub fn write_predictions_file(path: impl AsRef<Path>, results: &[ClassificationResult]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_predictions(&mut f, results)?;
    f.flush()?;
    Ok(())
}
