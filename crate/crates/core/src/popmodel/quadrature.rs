//! Adaptive Gauss–Kronrod integration on intervals and randomized Halton
//! quasi-Monte Carlo on boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Integral estimate with an error bound (G-K) or standard error (RQMC).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XK[j];
        let s = f(c - x) + f(c + x);
        kron += WK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Estimate {
        value: kron * h,
        error: ((kron - gauss) * h).abs(),
    }
}

const MAX_INTERVALS: usize = 20_000;

/// Globally adaptive G-K15 on `[a, b]` until the summed error is below `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<Estimate> {
    integrate_tol(f, a, b, abs_tol, 0.0)
}

/// As [`integrate`], stopping once the error is below `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_tol<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::input(format!("integration limits [{a}, {b}] must be finite")));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    loop {
        let (value, error) = parts
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.2.value, e + p.2.error));
        if !value.is_finite() {
            return Err(Error::numerical(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let tol = abs_tol.max(rel_tol * value.abs());
        if error <= tol {
            return Ok(Estimate { value, error });
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::numerical(format!(
                "quadrature on [{a}, {b}] stopped at estimate {value} with error {error} > {tol}"
            )));
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .expect("non-empty");
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
}

/// Integrates over consecutive pieces `[b_0, b_1], [b_1, b_2], …` splitting the
/// tolerance evenly.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], abs_tol: f64) -> Result<Estimate> {
    let pieces = breaks.len().saturating_sub(1).max(1);
    let mut total = Estimate { value: 0.0, error: 0.0 };
    for w in breaks.windows(2) {
        let e = integrate(&f, w[0], w[1], abs_tol / pieces as f64)?;
        total.value += e.value;
        total.error += e.error;
    }
    Ok(total)
}

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// Settings for randomized quasi-Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmcOptions {
    pub points: usize,
    pub shifts: usize,
    pub seed: u64,
}

impl Default for QmcOptions {
    fn default() -> Self {
        Self {
            points: 1 << 16,
            shifts: 8,
            seed: 0x5eed,
        }
    }
}

/// Integrates `f` over the box `[lower, upper]` with Cranley–Patterson shifted
/// Halton points. The error is the standard error across shifts.
pub fn qmc_box<F: Fn(&[f64]) -> f64>(
    f: F,
    lower: &[f64],
    upper: &[f64],
    opts: QmcOptions,
) -> Result<Estimate> {
    let dim = lower.len();
    if dim == 0 || dim > PRIMES.len() || upper.len() != dim {
        return Err(Error::Unsupported(format!(
            "quasi-Monte Carlo supports 1..={} dimensions, got {dim}",
            PRIMES.len()
        )));
    }
    if opts.shifts < 2 || opts.points == 0 {
        return Err(Error::input("quasi-Monte Carlo needs >= 2 shifts and >= 1 point"));
    }
    let volume: f64 = lower.iter().zip(upper).map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut means = Vec::with_capacity(opts.shifts);
    let mut x = vec![0.0; dim];
    for _ in 0..opts.shifts {
        let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let mut acc = 0.0;
        for i in 1..=opts.points as u64 {
            for j in 0..dim {
                let u = (radical_inverse(i, PRIMES[j] as u64) + shift[j]).fract();
                x[j] = lower[j] + u * (upper[j] - lower[j]);
            }
            acc += f(&x);
        }
        means.push(volume * acc / opts.points as f64);
    }
    let s = means.len() as f64;
    let value = means.iter().sum::<f64>() / s;
    let var = means.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (s - 1.0);
    if !value.is_finite() {
        return Err(Error::numerical("non-finite integrand in quasi-Monte Carlo"));
    }
    Ok(Estimate {
        value,
        error: (var / s).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_gaussian() {
        let e = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-12).unwrap();
        assert!((e.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-12);
        let g = integrate(|x| (-x * x / 2.0).exp(), -12.0, 12.0, 1e-12).unwrap();
        assert!((g.value - (2.0 * PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn kink_needs_adaptivity() {
        let e = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-9).unwrap();
        assert!((e.value - 4.0 / 3.0).abs() < 1e-8);
        let p = integrate_pieces(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], 1e-12).unwrap();
        assert!((p.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn reports_failure() {
        let err = integrate(|x: f64| 1.0 / x.abs(), -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn halton_box_integral() {
        let opts = QmcOptions { points: 1 << 12, shifts: 8, seed: 1 };
        let e = qmc_box(|x| x[0] * x[1] * x[2], &[0.0; 3], &[1.0, 2.0, 3.0], opts).unwrap();
        assert!((e.value - 4.5).abs() < 4.0 * e.error + 1e-6, "{e:?}");
        assert!(e.error < 1e-2);
        let again = qmc_box(|x| x[0] * x[1] * x[2], &[0.0; 3], &[1.0, 2.0, 3.0], opts).unwrap();
        assert_eq!(e, again);
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(radical_inverse(4, 2), 0.125);
    }
}
