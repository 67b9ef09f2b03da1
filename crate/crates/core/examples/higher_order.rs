//! Signed second-order weights cancel the leading bias term.

use wnnlab::weightgen::asymptotics::regret_terms;
use wnnlab::weightgen::{higher_order_coefficients, higher_order_weights, uniform_weights, CoefficientPath};

fn main() -> wnnlab::Result<()> {
    let (k, n) = (500, 500);
    for d in 1..=3 {
        let b0 = 1.0 + d as f64;
        let exact = higher_order_coefficients(2, k, b0, d, CoefficientPath::Exact)?;
        let closed = higher_order_coefficients(2, k, b0, d, CoefficientPath::ClosedForm)?;
        let w = higher_order_weights(2, k, b0, n, d, CoefficientPath::Exact)?;
        let u = uniform_weights(k, n)?;
        println!("d = {d}");
        println!("  b exact  = {exact:?}");
        println!("  b closed = {closed:?}");
        println!(
            "  sum w = {:.12}, sum alpha1 w = {:.3e}, min w = {:.4}",
            w.sum(),
            w.sum_alpha(d, 1),
            w.min()
        );
        let sb = regret_terms(&w, 1.0, 1.0, d, 1).squared_bias;
        let su = regret_terms(&u, 1.0, 1.0, d, 1).squared_bias;
        println!("  first-order squared bias: signed {sb:.3e}, uniform {su:.3e}");
    }
    Ok(())
}
