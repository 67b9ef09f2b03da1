//! Train on a simulated sample, classify a second one, and compare the test
//! error with the Bayes risk.

use wnnlab::classifier::{empirical_risk, WeightedNnClassifier};
use wnnlab::popmodel::{bayes_risk, compute_constants};
use wnnlab::weightgen::optimal_weights;
use wnnlab::{BoxRegion, NormSpec, PopulationModel};

fn main() -> wnnlab::Result<()> {
    let region = BoxRegion::new(vec![-2.0, -2.0], vec![3.0, 3.0])?;
    let pop = PopulationModel::isotropic_pair(0.6, vec![0.0, 0.0], vec![1.5, 0.5], 1.0)?
        .with_region(region.clone())?;
    let n = 3000;
    let train = pop.sample(n, 11)?;
    let test = pop.sample(5000, 12)?;

    let c = compute_constants(&pop, NormSpec::Euclidean, n)?;
    let k = c.k_star.expect("B2 > 0").k;
    let w = optimal_weights(k, n, pop.dim())?;

    let clf = WeightedNnClassifier::new(&train, &w, NormSpec::Euclidean)?;
    let first = clf.predict(test.point(0))?;
    println!("first test point {:?}: label {} scores {:?}", test.point(0), first.label, first.vote_scores);

    // errors and the Bayes risk both restricted to the region
    let err = empirical_risk(&train, &test, &w, NormSpec::Euclidean, Some(&region))?;
    println!("k* = {k}: test error on R {err:.4}, Bayes risk on R {:.4}", bayes_risk(&pop)?.value);
    Ok(())
}
