//! Monte Carlo regret estimation and the experiment drivers built on it.
//!
//! Every replicate draws a fresh training sample of size `n` followed by a
//! fresh test sample of size `n_test` from one ChaCha8 stream seeded with
//! [`replicate_seed`]`(seed, replicate)`. All schemes in a call see the same
//! samples, so their differences carry no sampling noise from the data draw
//! itself. Per-replicate results are collected by replicate index and reduced
//! serially, which makes every output independent of the worker count.

mod experiments;
mod scheme;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{decide, effective_support, margin, vote_scores};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::popmodel::{compute_constants, PopulationModel};
use crate::search::{nearest_prefix, KdTree, NormSpec};
use crate::weightgen::WeightVector;

pub use experiments::{
    emit_ratio_curves, emit_weight_profiles, ratio_experiment, ratio_curve_rows, run_grid,
    weight_profile_rows, write_ratio_table, write_regret_table, ExperimentGrid, ExperimentKind,
    sidecar_path, GridOutput, RatioRow, RATIO_COLUMNS, REGRET_COLUMNS,
};
pub use scheme::SchemeSpec;

pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_N_TEST: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretEstimate {
    pub scheme: SchemeSpec,
    /// Number of leading non-zero weights; 0 for the Bayes rule.
    pub support: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub replicates: usize,
    pub seed: u64,
    pub regret_mean: f64,
    pub std_error: f64,
    /// Mean loss difference of each replicate, in replicate order.
    #[serde(skip)]
    pub replicate_means: Vec<f64>,
}

/// Per-test-point loss used to estimate the regret.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `1{Ĉ(X) ≠ Y, X ∈ R} − 1{C_Bayes(X) ≠ Y, X ∈ R}`.
    #[default]
    Indicator,
    /// Its expectation over `Y` given `X`: `|2η(X) − 1| 1{Ĉ(X) ≠ C_Bayes(X), X ∈ R}`.
    /// Same mean, without the label noise.
    Conditional,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "indicator" => Ok(LossKind::Indicator),
            "conditional" => Ok(LossKind::Conditional),
            other => Err(Error::config(format!("unknown loss {other:?} (indicator or conditional)"))),
        }
    }
}

/// Settings shared by every scheme in one estimation call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub replicates: usize,
    pub n_test: usize,
    pub seed: u64,
    pub norm: NormSpec,
    /// Worker threads; `None` uses rayon's default (logical cores).
    pub threads: Option<usize>,
    pub loss: LossKind,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            n_test: DEFAULT_N_TEST,
            seed: 1,
            norm: NormSpec::Euclidean,
            threads: None,
            loss: LossKind::Indicator,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `rep`: `splitmix64(seed ⊕ splitmix64(rep))`.
pub fn replicate_seed(seed: u64, rep: u64) -> u64 {
    splitmix64(seed ^ splitmix64(rep))
}

/// Mean and standard error of the mean; the error is 0 for a single value.
pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (r - 1.0) / r).sqrt())
}

/// Runs `f` on a dedicated pool with `threads` workers (or the global pool).
pub(crate) fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::config(format!("cannot start {t} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// `(B1, B2)` when some scheme needs them; fails with a configuration error
/// if `B2 = 0`.
pub(crate) fn constants_for(
    pop: &PopulationModel,
    schemes: &[SchemeSpec],
    norm: NormSpec,
    n: usize,
) -> Result<Option<(f64, f64)>> {
    if !schemes.iter().any(|s| s.needs_constants()) {
        return Ok(None);
    }
    let c = compute_constants(pop, norm, n)?;
    c.require_b2()?;
    Ok(Some((c.b1, c.b2)))
}

pub fn estimate_regret(
    pop: &PopulationModel,
    scheme: SchemeSpec,
    n: usize,
    n_test: usize,
    replicates: usize,
    seed: u64,
) -> Result<RegretEstimate> {
    let opts = RunOptions { replicates, n_test, seed, ..Default::default() };
    Ok(estimate_regrets(pop, &[scheme], n, &opts)?.remove(0))
}

/// Regret of each scheme at training size `n` on common samples.
pub fn estimate_regrets(
    pop: &PopulationModel,
    schemes: &[SchemeSpec],
    n: usize,
    opts: &RunOptions,
) -> Result<Vec<RegretEstimate>> {
    let constants = constants_for(pop, schemes, opts.norm, n)?;
    estimate_regrets_with(pop, schemes, n, opts, constants)
}

/// As [`estimate_regrets`] with `(B1, B2)` supplied by the caller.
pub fn estimate_regrets_with(
    pop: &PopulationModel,
    schemes: &[SchemeSpec],
    n: usize,
    opts: &RunOptions,
    constants: Option<(f64, f64)>,
) -> Result<Vec<RegretEstimate>> {
    if schemes.is_empty() {
        return Err(Error::input("no schemes to estimate"));
    }
    if n == 0 || opts.n_test == 0 || opts.replicates == 0 {
        return Err(Error::input("n, n_test and replicates must all be at least 1"));
    }
    let weights: Vec<Option<WeightVector>> = schemes
        .iter()
        .map(|s| s.resolve(n, pop.dim(), constants))
        .collect::<Result<_>>()?;
    let per_rep: Vec<Vec<f64>> = with_pool(opts.threads, || {
        (0..opts.replicates)
            .into_par_iter()
            .map(|rep| {
                let seed = replicate_seed(opts.seed, rep as u64);
                replicate(pop, &weights, n, opts, seed)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(schemes
        .iter()
        .zip(&weights)
        .enumerate()
        .map(|(s, (scheme, w))| {
            let means: Vec<f64> = per_rep.iter().map(|r| r[s]).collect();
            let (regret_mean, std_error) = mean_and_se(&means);
            RegretEstimate {
                scheme: *scheme,
                support: w.as_ref().map_or(0, |w| w.support()),
                n_train: n,
                n_test: opts.n_test,
                replicates: opts.replicates,
                seed: opts.seed,
                regret_mean,
                std_error,
                replicate_means: means,
            }
        })
        .collect())
}

struct Prepared<'a> {
    weights: &'a [f64],
    support: usize,
    tail: f64,
}

/// Mean loss difference of every scheme on one replicate.
fn replicate(
    pop: &PopulationModel,
    weights: &[Option<WeightVector>],
    n: usize,
    opts: &RunOptions,
    seed: u64,
) -> Result<Vec<f64>> {
    let (n_test, norm) = (opts.n_test, opts.norm);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = pop.sample_with(&mut rng, n)?;
    let test = pop.sample_with(&mut rng, n_test)?;
    let prepared: Vec<Option<Prepared>> = weights
        .iter()
        .map(|w| {
            w.as_ref().map(|w| {
                let (support, tail) = effective_support(w.as_slice());
                Prepared { weights: w.as_slice(), support, tail }
            })
        })
        .collect();
    let k_max = prepared.iter().flatten().map(|p| p.support).max().unwrap_or(0);
    let tree = (norm == NormSpec::Euclidean && k_max > 0).then(|| KdTree::build(&train));
    let order = |x: &[f64], k: usize| -> Result<Vec<usize>> {
        match &tree {
            Some(t) => Ok(t.nearest(x, k)),
            None => nearest_prefix(&train, x, norm, k),
        }
    };
    let region = pop.region();
    // integer counts keep the indicator loss exact
    let mut counts = vec![0i64; weights.len()];
    let mut sums = vec![0.0f64; weights.len()];
    for j in 0..test.len() {
        let x = test.point(j);
        if !region.contains(x) {
            continue;
        }
        let y = test.label(j);
        let bayes = pop.bayes_classify(x);
        let bayes_wrong = i64::from(bayes != y);
        let gap = match opts.loss {
            LossKind::Indicator => 0.0,
            LossKind::Conditional => (2.0 * pop.eta(x)? - 1.0).abs(),
        };
        let near = if k_max > 0 { order(x, k_max)? } else { Vec::new() };
        let mut full: Option<Vec<usize>> = None;
        for s in 0..prepared.len() {
            let Some(p) = &prepared[s] else { continue };
            let label = predict(&train, p, &near, &mut full, |k| order(x, k))?;
            counts[s] += i64::from(label != y) - bayes_wrong;
            if label != bayes {
                sums[s] += gap;
            }
        }
    }
    Ok(match opts.loss {
        LossKind::Indicator => counts.iter().map(|&l| l as f64 / n_test as f64).collect(),
        LossKind::Conditional => sums.iter().map(|&l| l / n_test as f64).collect(),
    })
}

fn predict(
    train: &LabeledDataset,
    p: &Prepared,
    near: &[usize],
    full: &mut Option<Vec<usize>>,
    order: impl Fn(usize) -> Result<Vec<usize>>,
) -> Result<usize> {
    let scores = vote_scores(train, &near[..p.support], p.weights);
    if p.tail > 0.0 && margin(&scores) <= 2.0 * p.tail {
        if full.is_none() {
            *full = Some(order(train.len())?);
        }
        let all = full.as_deref().unwrap_or_default();
        return Ok(decide(&vote_scores(train, all, p.weights)));
    }
    Ok(decide(&scores))
}
