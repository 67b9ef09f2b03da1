//! Experiment grids read from config files, the regret-ratio experiment and
//! the plot-data tables for weight profiles and limiting ratio curves.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::config::{parse_list, KvConfig};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::popmodel::{compute_constants, PopulationModel};
use crate::search::NormSpec;
use crate::simharness::{
    estimate_regrets, estimate_regrets_with, LossKind, RegretEstimate, RunOptions, SchemeSpec,
    DEFAULT_N_TEST, DEFAULT_REPLICATES,
};
use crate::weightgen::asymptotics::{k_opt, k_star, q_opt, regret_ratio_bnn, regret_ratio_wnn};
use crate::weightgen::optimal_weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// One row per `(n, scheme)`.
    Regret,
    /// Optimal weights, `k_opt`-NN and geometric bagging at `q_opt`, with ratios.
    Ratio,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "regret" => Ok(ExperimentKind::Regret),
            "ratio" => Ok(ExperimentKind::Ratio),
            other => Err(Error::config(format!("unknown experiment {other:?} (regret or ratio)"))),
        }
    }
}

/// A simulation described by a `key = value` file.
///
/// Keys: `population` (path), `n` (list), `schemes` (list, needed for
/// `experiment = regret`), `replicates`, `n_test`, `seed`, `output` (CSV
/// path), `norm`, `experiment`, `loss` (`indicator` or `conditional`).
#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub experiment: ExperimentKind,
    pub population_path: Option<PathBuf>,
    pub population: PopulationModel,
    pub schemes: Vec<SchemeSpec>,
    pub n_values: Vec<usize>,
    pub replicates: usize,
    pub n_test: usize,
    pub seed: u64,
    pub norm: NormSpec,
    pub loss: LossKind,
    pub output: Option<PathBuf>,
    /// The entries the grid was read from, for the JSON sidecar.
    pub source: Vec<(String, String)>,
}

const GRID_KEYS: &[&str] = &[
    "experiment", "population", "schemes", "n", "replicates", "n_test", "seed", "output", "norm",
    "loss",
];

impl ExperimentGrid {
    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        cfg.check_keys(GRID_KEYS)?;
        let experiment = cfg.parse_value("experiment")?.unwrap_or(ExperimentKind::Regret);
        let population_path = cfg
            .path("population")
            .ok_or_else(|| Error::config("missing required key \"population\""))?;
        let population = PopulationModel::read_config(&population_path)?;
        let schemes: Vec<SchemeSpec> = match cfg.get("schemes") {
            Some(v) => parse_list(v)?,
            None => Vec::new(),
        };
        let n_values: Vec<usize> = parse_list(
            cfg.get("n").ok_or_else(|| Error::config("missing required key \"n\""))?,
        )?;
        let grid = Self {
            experiment,
            population_path: Some(population_path),
            population,
            schemes,
            n_values,
            replicates: cfg.parse_value("replicates")?.unwrap_or(DEFAULT_REPLICATES),
            n_test: cfg.parse_value("n_test")?.unwrap_or(DEFAULT_N_TEST),
            seed: cfg.parse_value("seed")?.unwrap_or(1),
            norm: cfg.parse_value("norm")?.unwrap_or(NormSpec::Euclidean),
            loss: cfg.parse_value("loss")?.unwrap_or_default(),
            output: cfg.path("output"),
            source: cfg.entries().iter().map(|e| (e.key.clone(), e.value.clone())).collect(),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config(&KvConfig::read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(Error::config("n must be a non-empty list of positive sizes"));
        }
        if self.experiment == ExperimentKind::Regret && self.schemes.is_empty() {
            return Err(Error::config("schemes must be a non-empty list"));
        }
        if self.n_test == 0 || self.replicates == 0 {
            return Err(Error::config("n_test and replicates must be at least 1"));
        }
        Ok(())
    }

    pub fn run_options(&self, threads: Option<usize>) -> RunOptions {
        RunOptions {
            replicates: self.replicates,
            n_test: self.n_test,
            seed: self.seed,
            norm: self.norm,
            threads,
            loss: self.loss,
        }
    }

    fn sidecar(&self, columns: &[&str]) -> serde_json::Value {
        json!({
            "library": "wnnlab",
            "version": env!("CARGO_PKG_VERSION"),
            "experiment": self.experiment,
            "seed": self.seed,
            "replicates": self.replicates,
            "n_test": self.n_test,
            "norm": self.norm.name(),
            "loss": self.loss,
            "n": self.n_values,
            "schemes": self.schemes,
            "population": self.population,
            "config": self.source,
            "columns": columns,
        })
    }
}

/// One row of the ratio experiment. Ratios are of mean regrets; their
/// standard errors use the delta method on the paired replicate means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub n: usize,
    pub k_star: usize,
    pub k_opt: usize,
    pub q_opt: f64,
    pub wnn: RegretEstimate,
    pub knn: RegretEstimate,
    pub bnn: RegretEstimate,
    pub ratio_wnn: f64,
    pub ratio_wnn_se: f64,
    pub ratio_bnn: f64,
    pub ratio_bnn_se: f64,
    pub limit_wnn: f64,
    pub limit_bnn: f64,
}

/// `(ā/b̄, se)` with `var ≈ s²(a_i − r b_i) / (R b̄²)`.
pub(crate) fn paired_ratio(a: &[f64], b: &[f64]) -> (f64, f64) {
    let r = a.len() as f64;
    let ma = a.iter().sum::<f64>() / r;
    let mb = b.iter().sum::<f64>() / r;
    let ratio = ma / mb;
    if a.len() < 2 {
        return (ratio, 0.0);
    }
    let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - ratio * y).collect();
    let mr = resid.iter().sum::<f64>() / r;
    let s2 = resid.iter().map(|v| (v - mr) * (v - mr)).sum::<f64>() / (r - 1.0);
    (ratio, (s2 / r).sqrt() / mb.abs())
}

pub fn ratio_experiment(grid: &ExperimentGrid, threads: Option<usize>) -> Result<Vec<RatioRow>> {
    let pop = &grid.population;
    let d = pop.dim();
    let c = compute_constants(pop, grid.norm, grid.n_values[0])?;
    c.require_b2()?;
    let bc = Some((c.b1, c.b2));
    let schemes = [SchemeSpec::OptimalKStar, SchemeSpec::UniformKOpt, SchemeSpec::GeometricQOpt];
    let opts = grid.run_options(threads);
    let mut rows = Vec::with_capacity(grid.n_values.len());
    for &n in &grid.n_values {
        let mut est = estimate_regrets_with(pop, &schemes, n, &opts, bc)?.into_iter();
        let (wnn, knn, bnn) = (est.next().unwrap(), est.next().unwrap(), est.next().unwrap());
        let (ratio_wnn, ratio_wnn_se) = paired_ratio(&wnn.replicate_means, &knn.replicate_means);
        let (ratio_bnn, ratio_bnn_se) = paired_ratio(&bnn.replicate_means, &knn.replicate_means);
        rows.push(RatioRow {
            n,
            k_star: k_star(c.b1, c.b2, d, n)?.k,
            k_opt: k_opt(c.b1, c.b2, d, n)?.k,
            q_opt: q_opt(c.b1, c.b2, d, n)?.q,
            wnn,
            knn,
            bnn,
            ratio_wnn,
            ratio_wnn_se,
            ratio_bnn,
            ratio_bnn_se,
            limit_wnn: regret_ratio_wnn(d),
            limit_bnn: regret_ratio_bnn(d),
        });
    }
    Ok(rows)
}

pub const REGRET_COLUMNS: &[&str] = &[
    "n", "scheme", "support", "regret_mean", "std_error", "replicates", "n_test", "seed",
];

pub const RATIO_COLUMNS: &[&str] = &[
    "n", "k_star", "k_opt", "q_opt", "regret_wnn", "se_wnn", "regret_knn", "se_knn", "regret_bnn",
    "se_bnn", "ratio_wnn", "se_ratio_wnn", "ratio_bnn", "se_ratio_bnn", "limit_wnn", "limit_bnn",
];

pub fn write_regret_table<W: Write + ?Sized>(out: &mut W, rows: &[RegretEstimate]) -> Result<()> {
    writeln!(out, "{}", REGRET_COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n_train,
            r.scheme,
            r.support,
            sig12(r.regret_mean),
            sig12(r.std_error),
            r.replicates,
            r.n_test,
            r.seed
        )?;
    }
    Ok(())
}

pub fn write_ratio_table<W: Write + ?Sized>(out: &mut W, rows: &[RatioRow]) -> Result<()> {
    writeln!(out, "{}", RATIO_COLUMNS.join(","))?;
    for r in rows {
        let cells = [
            r.n.to_string(),
            r.k_star.to_string(),
            r.k_opt.to_string(),
            sig12(r.q_opt),
            sig12(r.wnn.regret_mean),
            sig12(r.wnn.std_error),
            sig12(r.knn.regret_mean),
            sig12(r.knn.std_error),
            sig12(r.bnn.regret_mean),
            sig12(r.bnn.std_error),
            sig12(r.ratio_wnn),
            sig12(r.ratio_wnn_se),
            sig12(r.ratio_bnn),
            sig12(r.ratio_bnn_se),
            sig12(r.limit_wnn),
            sig12(r.limit_bnn),
        ];
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// What [`run_grid`] produced.
#[derive(Debug, Clone)]
pub enum GridOutput {
    Regret(Vec<RegretEstimate>),
    Ratio(Vec<RatioRow>),
}

impl GridOutput {
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> Result<()> {
        match self {
            GridOutput::Regret(rows) => write_regret_table(out, rows),
            GridOutput::Ratio(rows) => write_ratio_table(out, rows),
        }
    }
}

/// Sidecar path for a CSV output: the same path with extension `json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Runs the grid; when it names an `output`, writes the CSV there and the JSON
/// sidecar next to it.
pub fn run_grid(grid: &ExperimentGrid, threads: Option<usize>) -> Result<GridOutput> {
    let result = match grid.experiment {
        ExperimentKind::Regret => {
            let opts = grid.run_options(threads);
            let mut rows = Vec::new();
            for &n in &grid.n_values {
                rows.extend(estimate_regrets(&grid.population, &grid.schemes, n, &opts)?);
            }
            GridOutput::Regret(rows)
        }
        ExperimentKind::Ratio => GridOutput::Ratio(ratio_experiment(grid, threads)?),
    };
    if let Some(path) = &grid.output {
        let mut f = BufWriter::new(File::create(path)?);
        result.write_csv(&mut f)?;
        f.flush()?;
        let columns = match grid.experiment {
            ExperimentKind::Regret => REGRET_COLUMNS,
            ExperimentKind::Ratio => RATIO_COLUMNS,
        };
        let mut text = serde_json::to_string_pretty(&grid.sidecar(columns))?;
        text.push('\n');
        std::fs::write(sidecar_path(path), text)?;
    }
    Ok(result)
}

/// `(i, d, w_i / w_1)` for the positive optimal weights at `k*`, one block per `d`.
pub fn weight_profile_rows(dims: &[usize], k_star: usize) -> Result<Vec<(usize, usize, f64)>> {
    if k_star == 0 {
        return Err(Error::input("k* must be at least 1"));
    }
    let mut rows = Vec::new();
    for &d in dims {
        let w = optimal_weights(k_star, k_star, d)?;
        let first = w.as_slice()[0];
        for (i, wi) in w.as_slice().iter().enumerate().take(w.support()) {
            rows.push((i + 1, d, wi / first));
        }
    }
    Ok(rows)
}

/// Writes `i,d,w_i`, each profile scaled to weight 1 on the nearest neighbour.
pub fn emit_weight_profiles<W: Write + ?Sized>(out: &mut W, dims: &[usize], k_star: usize) -> Result<()> {
    writeln!(out, "i,d,w_i")?;
    for (i, d, w) in weight_profile_rows(dims, k_star)? {
        writeln!(out, "{i},{d},{}", sig12(w))?;
    }
    Ok(())
}

/// `(d, regret_ratio_wnn(d), regret_ratio_bnn(d))` for `d = 1..=d_max`.
pub fn ratio_curve_rows(d_max: usize) -> Result<Vec<(usize, f64, f64)>> {
    if d_max == 0 {
        return Err(Error::input("d_max must be at least 1"));
    }
    Ok((1..=d_max).map(|d| (d, regret_ratio_wnn(d), regret_ratio_bnn(d))).collect())
}

/// Writes `d,wnn,bnn`.
pub fn emit_ratio_curves<W: Write + ?Sized>(out: &mut W, d_max: usize) -> Result<()> {
    writeln!(out, "d,wnn,bnn")?;
    for (d, w, b) in ratio_curve_rows(d_max)? {
        writeln!(out, "{d},{},{}", sig12(w), sig12(b))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_follow_dimension_shape() {
        let rows = weight_profile_rows(&[1, 2, 4, 10], 100).unwrap();
        for d in [1, 2, 4, 10] {
            let w: Vec<f64> = rows.iter().filter(|r| r.1 == d).map(|r| r.2).collect();
            assert_eq!(w[0], 1.0);
            assert!(w[w.len() - 1] < w[0]);
            let second: Vec<f64> = w.windows(3).map(|t| t[0] - 2.0 * t[1] + t[2]).collect();
            match d {
                1 => assert!(second.iter().all(|s| *s < 0.0)),
                2 => assert!(second.iter().all(|s| s.abs() < 1e-12)),
                _ => assert!(second.iter().all(|s| *s > 0.0)),
            }
        }
        let raw = optimal_weights(100, 100, 4).unwrap();
        assert!((raw.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_curve_shape() {
        let rows = ratio_curve_rows(50).unwrap();
        let best = rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(best.0, 4);
        assert!(rows.iter().take(15).all(|r| r.1 <= 0.95));
        assert!(rows[0].2 > 1.0 && rows[2].2 < 1.0);
        let mut buf = Vec::new();
        emit_ratio_curves(&mut buf, 4).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,wnn,bnn\n1,"));
        let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(last[0], 4.0);
        assert!((last[1] - 0.9186).abs() < 5e-4);
    }

    #[test]
    fn paired_ratio_oracle() {
        let (r, se) = paired_ratio(&[2.0, 4.0], &[4.0, 4.0]);
        assert_eq!(r, 0.75);
        // residuals -1, 1: s² = 2, se = sqrt(2/2)/4
        assert!((se - 0.25).abs() < 1e-15);
    }

    #[test]
    fn grid_from_config_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("pop.cfg"),
            "dim = 1\nprior = 0.5\nclass1 = mean=0 var=1\nclass2 = mean=2 var=1\n",
        )
        .unwrap();
        std::fs::write(
            dir.path().join("grid.cfg"),
            "population = pop.cfg\nschemes = bayes, uniform:3\nn = 30, 60\nreplicates = 3\nn_test = 40\nseed = 5\noutput = out.csv\n",
        )
        .unwrap();
        let grid = ExperimentGrid::read(dir.path().join("grid.cfg")).unwrap();
        assert_eq!(grid.schemes, vec![SchemeSpec::Bayes, SchemeSpec::Uniform(3)]);
        let GridOutput::Regret(rows) = run_grid(&grid, Some(2)).unwrap() else {
            panic!("expected regret rows");
        };
        assert_eq!(rows.len(), 4);
        let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
        assert!(csv.starts_with("n,scheme,support,regret_mean,std_error,replicates,n_test,seed\n30,bayes,0,0,0,3,40,5\n"));
        let side: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
        assert_eq!(side["seed"], 5);
        assert_eq!(side["schemes"][1], "uniform:3");
    }

    #[test]
    fn grid_errors() {
        let cfg = KvConfig::parse("population = nowhere.cfg\nn = 10\nschemes = bayes\n").unwrap();
        assert!(matches!(ExperimentGrid::from_config(&cfg), Err(Error::Config(_))));
        let cfg = KvConfig::parse("bogus = 1\n").unwrap();
        assert!(matches!(ExperimentGrid::from_config(&cfg), Err(Error::Config(_))));
    }
}
