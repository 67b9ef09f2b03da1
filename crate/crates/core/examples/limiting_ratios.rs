//! Limiting regret ratios against the best unweighted k-NN rule.

use wnnlab::weightgen::asymptotics::{mu_factor, regret_ratio_bnn, regret_ratio_wnn};

fn main() {
    println!("{:>3}{:>10}{:>10}{:>10}", "d", "mu", "wnn", "bnn");
    for d in [1, 2, 3, 4, 5, 8, 10, 20, 50] {
        println!(
            "{d:>3}{:>10.4}{:>10.4}{:>10.4}",
            mu_factor(d),
            regret_ratio_wnn(d),
            regret_ratio_bnn(d)
        );
    }
    let best = (1..=50)
        .min_by(|a, b| regret_ratio_wnn(*a).total_cmp(&regret_ratio_wnn(*b)))
        .unwrap();
    println!("largest improvement at d = {best}: {:.2}%", 100.0 * (1.0 - regret_ratio_wnn(best)));
}
