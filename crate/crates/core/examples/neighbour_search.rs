//! The kd-tree returns exactly the brute-force ordering, ties included.

use std::time::Instant;

use wnnlab::search::{order_by_distance, KdTree};
use wnnlab::{NormSpec, PopulationModel};

fn main() -> wnnlab::Result<()> {
    for d in [1, 3, 8] {
        let pop = PopulationModel::isotropic_pair(0.5, vec![0.0; d], vec![1.0; d], 1.0)?;
        let data = pop.sample(20_000, 1)?;
        let queries = pop.sample(100, 2)?;
        let t = Instant::now();
        let tree = KdTree::build(&data);
        let kd: Vec<Vec<usize>> = queries.points().map(|q| tree.nearest(q, 50)).collect();
        let kd_time = t.elapsed();
        let t = Instant::now();
        let brute: Vec<Vec<usize>> = queries
            .points()
            .map(|q| order_by_distance(&data, q, NormSpec::Euclidean).map(|o| o[..50].to_vec()))
            .collect::<wnnlab::Result<_>>()?;
        let brute_time = t.elapsed();
        println!("d = {d}: identical = {}, kd {kd_time:?}, brute {brute_time:?}", kd == brute);
    }
    Ok(())
}
