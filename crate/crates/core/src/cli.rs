//! Command-line front end. Every command parses flags, calls the library and
//! prints the result; numbers are printed with 12 significant digits.
//!
//! Exit codes: 0 success, 2 usage/input/configuration error, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::classifier::{write_predictions, ClassificationResult, WeightedNnClassifier};
use crate::config::parse_list;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::popmodel::{bayes_risk, compute_constants, PopulationModel};
use crate::search::{order_by_distance, KdTree, NormSpec};
use crate::simharness::{
    emit_ratio_curves, emit_weight_profiles, run_grid, ExperimentGrid, LossKind,
    SchemeSpec,
};
use crate::weightgen::admissibility::{check_w_dagger, check_w_n_beta};
use crate::weightgen::{
    bagged_with_weights, bagged_without_weights, geometric_weights, higher_order_weights,
    optimal_weights, uniform_weights, CoefficientPath, Scheme, WeightVector,
};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "WNNLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wnnlab", version, about = "Weighted nearest-neighbour classifiers and their regret")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a weight vector as CSV (`i,w_i`), or optimal profiles for several d.
    Weights(WeightsArgs),
    /// Print B1, B2, k*, k_opt, q_opt and the regret constants of a population.
    Constants(ConstantsArgs),
    /// Print the limiting regret ratios `d,wnn,bnn` for d = 1..dmax.
    Ratio(RatioArgs),
    /// Check a weight vector against the admissible classes.
    Check(CheckArgs),
    /// Classify the rows of a test CSV with a weighted nearest-neighbour rule.
    Classify(ClassifyArgs),
    /// Run a simulation grid.
    Simulate(SimulateArgs),
    /// Time kd-tree against brute-force neighbour ordering.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct WeightsArgs {
    /// uniform, optimal, bagged_with, bagged_without, geometric, higher_order
    #[arg(long)]
    scheme: Scheme,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    r: Option<usize>,
    /// Higher-order free parameter; defaults to 1 + d/2.
    #[arg(long)]
    b0: Option<f64>,
    /// Use the leading-order closed form for higher-order coefficients.
    #[arg(long)]
    closed_form: bool,
    /// Comma-separated dimensions: print scaled optimal profiles `i,d,w_i` at k = --k.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConstantsArgs {
    /// Population config file.
    #[arg(long)]
    pop: PathBuf,
    #[arg(long, default_value = "euclidean")]
    norm: NormSpec,
    /// Sample size for k*, k_opt and q_opt.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Also compute the Bayes risk.
    #[arg(long)]
    risk: bool,
    /// Print JSON instead of `quantity,value` lines.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct RatioArgs {
    #[arg(long, default_value_t = 50)]
    dmax: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Weight CSV (`i,w_i` or a single column).
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Order of the signed class; 0 checks the non-negative class only.
    #[arg(long, default_value_t = 0)]
    r: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Training CSV: feature columns then an integer label column.
    #[arg(long)]
    train: PathBuf,
    /// Test CSV in the same layout; labels are used only for the reported risk.
    #[arg(long)]
    test: PathBuf,
    /// Scheme spec, e.g. `optimal:40`, `uniform:7`, `geometric:0.05`, or `optimal` with --pop.
    #[arg(long)]
    scheme: SchemeSpec,
    /// Population config, needed by schemes tuned through B1 and B2.
    #[arg(long)]
    pop: Option<PathBuf>,
    #[arg(long, default_value = "euclidean")]
    norm: NormSpec,
    /// The CSV files have a header row.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Experiment grid config file.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    /// `indicator` or `conditional`.
    #[arg(long)]
    loss: Option<LossKind>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 200)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Weights(a) => weights(a, out),
        Command::Constants(a) => constants(a, out),
        Command::Ratio(a) => ratio(a, out),
        Command::Check(a) => check(a, out),
        Command::Classify(a) => classify(a, out, err),
        Command::Simulate(a) => simulate(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

/// Writes to `path` when given, otherwise to `out`.
fn emit(path: &Option<PathBuf>, out: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(p)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

fn need<T>(v: Option<T>, flag: &str, scheme: Scheme) -> Result<T> {
    v.ok_or_else(|| Error::Input(format!("--{flag} is required for scheme {scheme}")))
}

fn weights(a: WeightsArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(dims) = &a.dims {
        let dims: Vec<usize> = parse_list(dims).map_err(|e| Error::Input(e.to_string()))?;
        let k = need(a.k, "k", Scheme::Optimal)?;
        return emit(&a.output, out, |w| emit_weight_profiles(w, &dims, k));
    }
    let s = a.scheme;
    let n = need(a.n, "n", s)?;
    let w: WeightVector = match s {
        Scheme::UniformK => uniform_weights(need(a.k, "k", s)?, n)?,
        Scheme::Optimal => optimal_weights(need(a.k, "k", s)?, n, need(a.d, "d", s)?)?,
        Scheme::BaggedWith => bagged_with_weights(n, need(a.m, "m", s)?)?,
        Scheme::BaggedWithout => bagged_without_weights(n, need(a.m, "m", s)?)?,
        Scheme::Geometric => geometric_weights(n, need(a.q, "q", s)?)?,
        Scheme::HigherOrder => {
            let path = if a.closed_form { CoefficientPath::ClosedForm } else { CoefficientPath::Exact };
            let d = need(a.d, "d", s)?;
            let b0 = a.b0.unwrap_or(1.0 + d as f64 / 2.0);
            higher_order_weights(need(a.r, "r", s)?, need(a.k, "k", s)?, b0, n, d, path)?
        }
        Scheme::Custom => {
            return Err(Error::Input("custom weights are read from files, not generated".into()))
        }
    };
    emit(&a.output, out, |o| {
        o.write_all(w.to_csv().as_bytes())?;
        Ok(())
    })
}

fn constants(a: ConstantsArgs, out: &mut dyn Write) -> Result<()> {
    let pop = PopulationModel::read_config(&a.pop)?;
    let c = compute_constants(&pop, a.norm, a.n)?;
    let risk = if a.risk { Some(bayes_risk(&pop)?) } else { None };
    if a.json {
        let mut v = serde_json::to_value(&c)?;
        if let Some(r) = risk {
            v["bayes_risk"] = serde_json::json!(r.value);
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        return Ok(());
    }
    writeln!(out, "quantity,value")?;
    writeln!(out, "d,{}", c.d)?;
    writeln!(out, "n,{}", c.n)?;
    writeln!(out, "norm,{}", c.norm)?;
    writeln!(out, "B1,{}", sig12(c.b1))?;
    writeln!(out, "B2,{}", sig12(c.b2))?;
    writeln!(out, "b2_zero,{}", c.b2_zero)?;
    if let Some(k) = c.k_star {
        writeln!(out, "k_star,{}", k.k)?;
        writeln!(out, "k_star_raw,{}", sig12(k.raw))?;
    }
    if let Some(k) = c.k_opt {
        writeln!(out, "k_opt,{}", k.k)?;
    }
    if let Some(q) = c.q_opt {
        writeln!(out, "q_opt,{}", sig12(q.q))?;
    }
    if let Some(r) = c.regret_constant {
        writeln!(out, "regret_constant,{}", sig12(r))?;
    }
    if let Some(g) = c.gamma_limit {
        writeln!(out, "gamma_limit,{}", sig12(g))?;
    }
    if let Some(r) = risk {
        writeln!(out, "bayes_risk,{}", sig12(r.value))?;
    }
    Ok(())
}

fn ratio(a: RatioArgs, out: &mut dyn Write) -> Result<()> {
    emit(&a.output, out, |o| emit_ratio_curves(o, a.dmax))
}

fn check(a: CheckArgs, out: &mut dyn Write) -> Result<()> {
    let w = WeightVector::read_csv(&a.weights)?;
    if !(a.beta > 0.0 && a.beta < 0.5) {
        return Err(Error::Input(format!("beta = {} must lie in (0, 1/2)", a.beta)));
    }
    if a.d == 0 {
        return Err(Error::Input("d must be at least 1".into()));
    }
    let report = if a.r == 0 {
        check_w_n_beta(&w, a.d, a.beta)
    } else {
        check_w_dagger(&w, a.d, a.beta, a.r)
    };
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    } else {
        write!(out, "{}", report.render())?;
    }
    Ok(())
}

fn classify(a: ClassifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let train = LabeledDataset::read_csv(&a.train, a.header)?;
    let test = LabeledDataset::read_csv(&a.test, a.header)?;
    if test.dim() != train.dim() {
        return Err(Error::Input(format!(
            "test set has dimension {}, training set has {}",
            test.dim(),
            train.dim()
        )));
    }
    let classes = train.classes().max(test.classes());
    let train = train.with_classes(classes)?;
    let pop = a.pop.as_ref().map(PopulationModel::read_config).transpose()?;
    let results: Vec<ClassificationResult> = if a.scheme == SchemeSpec::Bayes {
        let pop = pop.ok_or_else(|| Error::Config("scheme bayes needs --pop".into()))?;
        (0..test.len())
            .map(|i| {
                let (f1, f2) = pop.class_densities(test.point(i));
                let (v1, v2) = (pop.prior() * f1, (1.0 - pop.prior()) * f2);
                let t = v1 + v2;
                let scores = if t > 0.0 { vec![v1 / t, v2 / t] } else { vec![0.5, 0.5] };
                ClassificationResult { label: pop.bayes_classify(test.point(i)), vote_scores: scores }
            })
            .collect()
    } else {
        let constants = match (&pop, a.scheme.needs_constants()) {
            (Some(p), true) => {
                let c = compute_constants(p, a.norm, train.len())?;
                c.require_b2()?;
                Some((c.b1, c.b2))
            }
            _ => None,
        };
        let w = a
            .scheme
            .resolve(train.len(), train.dim(), constants)?
            .expect("weighted scheme");
        WeightedNnClassifier::new(&train, &w, a.norm)?.predict_batch(&test)?
    };
    let wrong = results.iter().enumerate().filter(|(i, r)| r.label != test.label(*i)).count();
    writeln!(err, "test error {} ({wrong}/{})", sig12(wrong as f64 / test.len() as f64), test.len())?;
    emit(&a.output, out, |o| write_predictions(o, &results))
}

/// `--threads`, then the environment variable, then rayon's default.
fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(None),
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mut grid = ExperimentGrid::read(&a.grid)?;
    if let Some(s) = a.seed {
        grid.seed = s;
    }
    if let Some(r) = a.replicates {
        grid.replicates = r;
    }
    if let Some(t) = a.n_test {
        grid.n_test = t;
    }
    if let Some(l) = a.loss {
        grid.loss = l;
    }
    if a.output.is_some() {
        grid.output = a.output;
    }
    grid.validate()?;
    let threads = thread_count(a.threads)?;
    let result = run_grid(&grid, threads)?;
    if grid.output.is_none() {
        result.write_csv(out)?;
    }
    Ok(())
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    if a.n == 0 || a.d == 0 || a.queries == 0 {
        return Err(Error::Input("n, d and queries must be at least 1".into()));
    }
    let pop = PopulationModel::isotropic_pair(0.5, vec![0.0; a.d], vec![1.0; a.d], 1.0)?;
    let data = pop.sample(a.n, a.seed)?;
    let queries = pop.sample(a.queries, a.seed.wrapping_add(1))?;
    let t0 = Instant::now();
    let tree = KdTree::build(&data);
    let build = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let kd: Vec<Vec<usize>> = queries.points().map(|q| tree.order(q)).collect();
    let kd_time = t1.elapsed().as_secs_f64();
    let t2 = Instant::now();
    let brute: Vec<Vec<usize>> = queries
        .points()
        .map(|q| order_by_distance(&data, q, NormSpec::Euclidean))
        .collect::<Result<_>>()?;
    let brute_time = t2.elapsed().as_secs_f64();
    if kd != brute {
        return Err(Error::Numerical("kd-tree and brute-force orderings differ".into()));
    }
    writeln!(out, "method,n,d,queries,seconds")?;
    writeln!(out, "kd_build,{},{},0,{}", a.n, a.d, sig12(build))?;
    writeln!(out, "kd_order,{},{},{},{}", a.n, a.d, a.queries, sig12(kd_time))?;
    writeln!(out, "brute_order,{},{},{},{}", a.n, a.d, a.queries, sig12(brute_time))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("wnnlab").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn weights_prints_profile() {
        let (code, out, _) = call(&["weights", "--scheme", "optimal", "--d", "2", "--k", "2", "--n", "4"]);
        assert_eq!(code, 0);
        assert_eq!(out, "i,w_i\n1,0.75\n2,0.25\n3,0\n4,0\n");
    }

    #[test]
    fn bad_input_exits_two() {
        assert_eq!(call(&["weights", "--scheme", "uniform", "--k", "0", "--n", "10"]).0, 2);
        assert_eq!(call(&["weights", "--scheme", "uniform", "--n", "10"]).0, 2);
        assert_eq!(call(&["nothing"]).0, 2);
        assert_eq!(call(&["ratio", "--dmax", "x"]).0, 2);
        let (code, _, err) = call(&["ratio", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("simulate"));
    }

    #[test]
    fn ratio_table() {
        let (code, out, _) = call(&["ratio", "--dmax", "4"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 5);
        assert!(out.lines().last().unwrap().starts_with("4,0.91855"));
    }

    #[test]
    fn numerical_failure_exits_three() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pop.cfg");
        // classes so far apart that the densities underflow on the boundary
        std::fs::write(&p, "dim = 1\nprior = 0.5\nclass1 = mean=0 var=1\nclass2 = mean=90 var=1\n").unwrap();
        let (code, _, err) = call(&["constants", "--pop", p.to_str().unwrap()]);
        assert_eq!(code, 3, "{err}");
    }
}
