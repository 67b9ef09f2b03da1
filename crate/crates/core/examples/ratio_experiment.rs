//! Regret of optimal weights, tuned k-NN and geometric bagging on a
//! one-dimensional Gaussian pair, with the limiting ratios for comparison.
//! Uses the conditional loss, which removes label noise from the estimates.
//!
//! cargo run --release --example ratio_experiment -- [replicates] [n_test]

use wnnlab::popmodel::compute_constants;
use wnnlab::simharness::{ratio_experiment, write_ratio_table, ExperimentGrid, ExperimentKind, LossKind};
use wnnlab::{NormSpec, PopulationModel};

fn main() -> wnnlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let replicates = args.next().map_or(Ok(100), |s| s.parse()).expect("replicates");
    let n_test = args.next().map_or(Ok(2000), |s| s.parse()).expect("n_test");

    // an unequal prior keeps B2 away from zero
    let pop = PopulationModel::gaussian_pair_1d(0.7, (0.0, 1.0), (2.0, 1.0))?;
    let c = compute_constants(&pop, NormSpec::Euclidean, 2000)?;
    println!("B1 = {:.6}  B2 = {:.6}", c.b1, c.b2);

    let grid = ExperimentGrid {
        experiment: ExperimentKind::Ratio,
        population_path: None,
        population: pop,
        schemes: Vec::new(),
        n_values: vec![500, 1000, 2000],
        replicates,
        n_test,
        seed: 2024,
        norm: NormSpec::Euclidean,
        loss: LossKind::Conditional,
        output: None,
        source: Vec::new(),
    };
    let rows = ratio_experiment(&grid, None)?;
    write_ratio_table(&mut std::io::stdout().lock(), &rows)?;
    Ok(())
}
