use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wnnlab::popmodel::{bayes_risk, compute_constants};
use wnnlab::{NormSpec, PopulationModel};

fn model() -> impl Strategy<Value = PopulationModel> {
    (0.2f64..0.8, -1.0f64..1.0, 1.0f64..3.0, 0.5f64..2.0).prop_map(|(pi, m1, gap, v)| {
        PopulationModel::gaussian_pair_1d(pi, (m1, v), (m1 + gap, v)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constants_survive_label_swap(pop in model()) {
        let a = compute_constants(&pop, NormSpec::Euclidean, 1000).unwrap();
        let b = compute_constants(&pop.swapped(), NormSpec::Euclidean, 1000).unwrap();
        prop_assert!((a.b1 / b.b1 - 1.0).abs() < 1e-8);
        prop_assert!((a.b2 - b.b2).abs() <= 1e-8 * a.b2.max(1e-12));
    }

    #[test]
    fn k_star_ignores_feature_scale(pop in model(), c in 0.1f64..10.0) {
        let a = compute_constants(&pop, NormSpec::Euclidean, 5000).unwrap();
        let b = compute_constants(&pop.scaled(c), NormSpec::Euclidean, 5000).unwrap();
        if let (Some(ka), Some(kb)) = (a.k_star, b.k_star) {
            prop_assert!((ka.raw / kb.raw - 1.0).abs() < 1e-6, "{} vs {}", ka.raw, kb.raw);
        }
        // in d = 1 both f̄ and |η′| pick up 1/c, so B1 is unchanged
        prop_assert!((a.b1 / b.b1 - 1.0).abs() < 1e-6);
    }
}

#[test]
fn bayes_risk_matches_monte_carlo() {
    // E[min(η, 1 − η)] by simulation with a ±4σ check
    let pops = [
        PopulationModel::gaussian_pair_1d(0.3, (0.0, 1.0), (1.5, 2.0)).unwrap(),
        PopulationModel::isotropic_pair(0.6, vec![0.0, 0.0], vec![1.0, 1.0], 1.0).unwrap(),
    ];
    for pop in &pops {
        let exact = bayes_risk(pop).unwrap().value;
        let data = pop.sample(200_000, 17).unwrap();
        let vals: Vec<f64> = data
            .points()
            .map(|x| {
                let e = pop.eta(x).unwrap();
                e.min(1.0 - e)
            })
            .collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64).sqrt();
        let se = sd / (vals.len() as f64).sqrt();
        assert!((m - exact).abs() < 4.0 * se + 1e-3 * exact, "{m} vs {exact} (se {se})");
    }
}

#[test]
fn eta_derivatives_match_finite_differences() {
    let pop = PopulationModel::gaussian_pair_1d(0.35, (0.0, 1.0), (1.2, 0.7)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let x: f64 = rng.random_range(-2.5..3.5);
        let h = 1e-4;
        let d = pop.eta_derivatives(&[x]).unwrap();
        let e = |t: f64| pop.eta(&[t]).unwrap();
        let g = (e(x + h) - e(x - h)) / (2.0 * h);
        let s = (e(x + h) - 2.0 * e(x) + e(x - h)) / (h * h);
        assert!((d.gradient[0] - g).abs() <= 1e-6 * g.abs().max(1e-3));
        assert!((d.hessian[0][0] - s).abs() <= 1e-4 * s.abs().max(1e-1));
    }
}
