use wnnlab::simharness::{estimate_regrets, LossKind, RunOptions, SchemeSpec};
use wnnlab::PopulationModel;

fn d1_model() -> PopulationModel {
    PopulationModel::gaussian_pair_1d(0.7, (0.0, 1.0), (2.0, 1.0)).unwrap()
}

#[test]
fn control_is_zero_for_every_cell() {
    let pop = d1_model();
    for (n, seed) in [(20, 1), (200, 2), (700, 3)] {
        for loss in [LossKind::Indicator, LossKind::Conditional] {
            let opts = RunOptions { replicates: 4, n_test: 300, seed, loss, ..Default::default() };
            let r = estimate_regrets(&pop, &[SchemeSpec::Bayes], n, &opts).unwrap();
            assert_eq!(r[0].regret_mean, 0.0);
            assert!(r[0].replicate_means.iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn doubling_replicates_shrinks_the_error_by_root_two() {
    let pop = d1_model();
    let se = |replicates: usize, seed: u64| {
        let opts = RunOptions { replicates, n_test: 200, seed, ..Default::default() };
        estimate_regrets(&pop, &[SchemeSpec::Uniform(1)], 100, &opts).unwrap()[0].std_error
    };
    // average over seeds so the ratio itself is stable
    let (mut small, mut large) = (0.0, 0.0);
    for seed in 0..8 {
        small += se(50, 100 + seed);
        large += se(100, 200 + seed);
    }
    let ratio = small / large;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn worker_count_does_not_change_results() {
    let pop = d1_model();
    let schemes: Vec<SchemeSpec> = ["optimal", "uniform_kopt", "geometric_qopt"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let run = |threads| {
        let opts = RunOptions { replicates: 10, n_test: 200, seed: 42, threads: Some(threads), ..Default::default() };
        estimate_regrets(&pop, &schemes, 300, &opts).unwrap()
    };
    let one = run(1);
    for t in [2, 3, 8] {
        assert_eq!(one, run(t));
    }
}

#[test]
fn optimal_weights_are_not_beaten_at_n_2000() {
    let pop = d1_model();
    let schemes: Vec<SchemeSpec> = [
        "optimal",
        "uniform_kopt",
        "geometric_qopt",
        "bagged_with_qopt",
        "bagged_without_qopt",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let opts = RunOptions { replicates: 40, n_test: 1000, seed: 77, ..Default::default() };
    let r = estimate_regrets(&pop, &schemes, 2000, &opts).unwrap();
    for other in &r[1..] {
        let se = (r[0].std_error.powi(2) + other.std_error.powi(2)).sqrt();
        assert!(
            r[0].regret_mean <= other.regret_mean + 2.0 * se,
            "{} {} vs {} {}",
            r[0].scheme,
            r[0].regret_mean,
            other.scheme,
            other.regret_mean
        );
    }
    for e in &r {
        assert!(e.std_error >= 0.0 && e.regret_mean >= -3.0 * e.std_error);
    }
}
