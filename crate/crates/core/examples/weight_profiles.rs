//! Optimal weight profiles at k* = 100, scaled to weight 1 on the nearest
//! neighbour: concave in d = 1, linear in d = 2, convex beyond.
//!
//! cargo run --example weight_profiles > profiles.csv

use wnnlab::simharness::emit_weight_profiles;

fn main() -> wnnlab::Result<()> {
    emit_weight_profiles(&mut std::io::stdout().lock(), &[1, 2, 4, 10], 100)
}
