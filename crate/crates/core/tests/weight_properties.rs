use proptest::prelude::*;
use statrs::function::gamma::gamma;

use wnnlab::weightgen::asymptotics::{k_opt, k_star, mu_factor, regret_ratio_bnn, regret_ratio_wnn};
use wnnlab::weightgen::{
    bagged_with_weights, bagged_without_weights, geometric_weights, optimal_weights,
    uniform_weights, SUM_TOLERANCE,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn optimal_profile_shape(d in 1usize..=50, k in 1usize..=10_000, extra in 0usize..50) {
        let w = optimal_weights(k, k + extra, d).unwrap();
        let s = w.as_slice();
        prop_assert!((w.sum() - 1.0).abs() <= SUM_TOLERANCE);
        prop_assert!(s.iter().all(|&v| v >= 0.0));
        prop_assert!(s.windows(2).all(|p| p[1] <= p[0]));
        prop_assert_eq!(w.support(), k);
        let pos = &s[..k];
        let tol = 1e-12 * pos[0];
        for t in pos.windows(3) {
            let second = t[0] - 2.0 * t[1] + t[2];
            match d {
                1 => prop_assert!(second <= tol),
                2 => prop_assert!(second.abs() <= tol),
                _ => prop_assert!(second >= -tol),
            }
        }
    }

    #[test]
    fn generators_sum_to_one(n in 1usize..3000, frac in 0.0f64..1.0, d in 1usize..10) {
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        let q = (frac * 0.98 + 0.01).min(0.99);
        for w in [
            uniform_weights(k, n).unwrap(),
            optimal_weights(k, n, d).unwrap(),
            bagged_with_weights(n, k).unwrap(),
            bagged_without_weights(n, k).unwrap(),
            geometric_weights(n, q).unwrap(),
        ] {
            prop_assert_eq!(w.n(), n);
            prop_assert!((w.sum() - 1.0).abs() <= SUM_TOLERANCE, "{}: {}", w.scheme(), w.sum());
            prop_assert!(w.as_slice().windows(2).all(|p| p[1] <= p[0] + 1e-15));
        }
    }

    #[test]
    fn k_star_is_mu_times_k_opt(b1 in 0.01f64..10.0, b2 in 0.01f64..10.0, d in 1usize..30, n in 10usize..1_000_000) {
        let ks = k_star(b1, b2, d, n).unwrap();
        let ko = k_opt(b1, b2, d, n).unwrap();
        let real = ks.raw / mu_factor(d);
        prop_assert!((mu_factor(d) * real - ks.raw).abs() <= 1e-9 * ks.raw);
        if !ko.clamped {
            prop_assert_eq!(ko.k, real.floor() as usize);
        }
    }
}

/// Non-increasing, so the max weight is first.
fn optimal_at(d: usize, k: usize) -> Vec<f64> {
    optimal_weights(k, k, d).unwrap().as_slice().to_vec()
}

#[test]
fn max_over_mean_weight_approaches_one_plus_half_d() {
    // k w_1 = 1 + d/2 − (d/2) k^{−2/d} exactly, so the 1% band is reached at
    // k = 10⁴ only for d ≤ 4
    let k = 10_000usize;
    for d in 1..=10 {
        let w = optimal_at(d, k);
        let ratio = w[0] * k as f64;
        let half = d as f64 / 2.0;
        let exact = 1.0 + half - half * (k as f64).powf(-2.0 / d as f64);
        assert!((ratio - exact).abs() < 1e-10, "d={d}: {ratio} vs {exact}");
        if d <= 4 {
            assert!((ratio / (1.0 + half) - 1.0).abs() < 0.01, "d={d}");
        }
    }
    let gap = |k: usize| 1.0 - optimal_at(6, k)[0] * k as f64 / 4.0;
    assert!(gap(100_000) < gap(10_000) && gap(10_000) < gap(1000));
}

#[test]
fn fraction_above_mean_near_inverse_e() {
    let w = optimal_at(100, 10_000);
    let above = w.iter().filter(|&&v| v > 1.0 / 10_000.0).count() as f64 / 10_000.0;
    let e_inv = (-1.0f64).exp();
    assert!((above / e_inv - 1.0).abs() < 0.02, "{above}");
}

#[test]
fn ratio_curves() {
    let wnn: Vec<f64> = (1..=200).map(regret_ratio_wnn).collect();
    assert!(wnn.iter().all(|&r| r < 1.0));
    let best = (0..50).min_by(|&a, &b| wnn[a].total_cmp(&wnn[b])).unwrap() + 1;
    assert_eq!(best, 4);
    assert!(wnn[199] > wnn[49] && wnn[199] > 0.99);
    assert!(regret_ratio_bnn(1) > 1.0);
    assert!((regret_ratio_bnn(2) - 1.0).abs() < 1e-12);
    assert!((3..=50).all(|d| regret_ratio_bnn(d) < 1.0));
}

#[test]
fn geometric_moments_match_gamma() {
    // Σ w_i² → q/2 and Σ α_i w_i → Γ(2+2/d) q^{-2/d} for the geometric weights
    let (n, q) = (1_000_000, 0.01);
    let w = geometric_weights(n, q).unwrap();
    assert!((w.sum_sq() / (q / 2.0) - 1.0).abs() < 0.02);
    for d in [1, 2, 5] {
        let target = gamma(2.0 + 2.0 / d as f64) / q.powf(2.0 / d as f64);
        assert!((w.sum_alpha(d, 1) / target - 1.0).abs() < 0.02, "d={d}");
    }
}
