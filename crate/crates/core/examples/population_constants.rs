//! B1, B2, k* and the Bayes risk of a few Gaussian populations.

use wnnlab::popmodel::{bayes_risk, compute_constants, decision_set};
use wnnlab::{BoxRegion, NormSpec, PopulationModel};

fn main() -> wnnlab::Result<()> {
    let models = [
        ("1d, equal priors", PopulationModel::gaussian_pair_1d(0.5, (0.0, 1.0), (2.0, 1.0))?),
        ("1d, prior 0.7", PopulationModel::gaussian_pair_1d(0.7, (0.0, 1.0), (2.0, 1.0))?),
        ("1d, unequal variances", PopulationModel::gaussian_pair_1d(0.4, (0.0, 1.0), (1.0, 4.0))?),
        // in d < 4 the B2 integrand grows along the boundary as the density
        // falls, so an unbounded region is dominated by its far edges
        (
            "2d isotropic, default region",
            PopulationModel::isotropic_pair(0.6, vec![0.0, 0.0], vec![1.5, 0.5], 1.0)?,
        ),
        (
            "2d isotropic, region [-2,3]^2",
            PopulationModel::isotropic_pair(0.6, vec![0.0, 0.0], vec![1.5, 0.5], 1.0)?
                .with_region(BoxRegion::new(vec![-2.0, -2.0], vec![3.0, 3.0])?)?,
        ),
    ];
    for (name, pop) in &models {
        let c = compute_constants(pop, NormSpec::Euclidean, 1000)?;
        let risk = bayes_risk(pop)?;
        println!("{name}");
        println!("  boundary: {}", serde_json::to_string(&decision_set(pop)?)?);
        println!("  bayes risk {:.6}  B1 {:.6}  B2 {:.6}", risk.value, c.b1, c.b2);
        match (c.k_star, c.q_opt) {
            (Some(k), Some(q)) => println!("  n=1000: k* {} q_opt {:.5}", k.k, q.q),
            _ => println!("  B2 = 0: k* and q_opt undefined"),
        }
    }
    Ok(())
}
