//! Which weight vectors satisfy the admissibility conditions.

use wnnlab::weightgen::admissibility::{check_w_dagger, check_w_n_beta};
use wnnlab::weightgen::{geometric_weights, higher_order_weights, uniform_weights, CoefficientPath};

fn main() -> wnnlab::Result<()> {
    let n = 100_000;
    let beta = 0.1;
    let k = (n as f64).powf(0.4).ceil() as usize;

    let cases = [
        (format!("uniform k={k}"), uniform_weights(k, n)?),
        ("uniform k=1".to_string(), uniform_weights(1, n)?),
        ("geometric q=n^-1/2".to_string(), geometric_weights(n, (n as f64).powf(-0.5))?),
    ];
    for (name, w) in &cases {
        let r = check_w_n_beta(w, 1, beta);
        println!("{name}: passes={} violated=[{}]", r.passes, r.violated.join(","));
    }

    let signed = higher_order_weights(2, 2000, 12.0, 1_000_000, 2, CoefficientPath::Exact)?;
    let r = check_w_dagger(&signed, 2, beta, 2);
    println!("\nsecond-order weights, d=2, k=2000:\n{}", r.render());
    Ok(())
}
