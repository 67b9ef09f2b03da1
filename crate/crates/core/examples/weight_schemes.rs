//! Every weight generator at one sample size, with the quantities that drive
//! the regret expansion.

use wnnlab::weightgen::asymptotics::{k_star, q_opt, regret_terms};
use wnnlab::weightgen::{
    bagged_with_weights, bagged_without_weights, geometric_weights, optimal_weights,
    uniform_weights,
};

fn main() -> wnnlab::Result<()> {
    let (n, d) = (5000, 3);
    let (b1, b2) = (0.2, 0.05);
    let ks = k_star(b1, b2, d, n)?;
    let q = q_opt(b1, b2, d, n)?;
    let m = (q.q * n as f64).ceil() as usize;
    println!("n = {n}, d = {d}: k* = {} (raw {:.2}), q_opt = {:.5}, m = {m}", ks.k, ks.raw, q.q);

    let schemes = [
        ("uniform k*", uniform_weights(ks.k, n)?),
        ("optimal", optimal_weights(ks.k, n, d)?),
        ("bagged with", bagged_with_weights(n, m)?),
        ("bagged without", bagged_without_weights(n, m)?),
        ("geometric", geometric_weights(n, q.q)?),
    ];
    println!("{:<16}{:>10}{:>14}{:>14}{:>14}", "scheme", "w_1", "sum w^2", "bias^2", "gamma_n");
    for (name, w) in &schemes {
        let t = regret_terms(w, b1, b2, d, 1);
        println!(
            "{name:<16}{:>10.5}{:>14.6e}{:>14.6e}{:>14.6e}",
            w.as_slice()[0],
            w.sum_sq(),
            t.squared_bias,
            t.total()
        );
    }
    Ok(())
}
