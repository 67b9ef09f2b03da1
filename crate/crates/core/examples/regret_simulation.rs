//! Monte Carlo regret of several schemes on common samples.

use wnnlab::simharness::{estimate_regrets, RunOptions, SchemeSpec};
use wnnlab::PopulationModel;

fn main() -> wnnlab::Result<()> {
    let pop = PopulationModel::gaussian_pair_1d(0.7, (0.0, 1.0), (2.0, 1.0))?;
    let schemes: Vec<SchemeSpec> = ["bayes", "uniform:1", "uniform_kopt", "optimal", "geometric_qopt", "bagged_without_qopt"]
        .iter()
        .map(|s| s.parse())
        .collect::<wnnlab::Result<_>>()?;
    let opts = RunOptions { replicates: 50, n_test: 1000, seed: 7, ..Default::default() };
    for r in estimate_regrets(&pop, &schemes, 1000, &opts)? {
        println!(
            "{:<22} support {:>5}  regret {:.5} ± {:.5}",
            r.scheme.to_string(),
            r.support,
            r.regret_mean,
            r.std_error
        );
    }
    Ok(())
}
