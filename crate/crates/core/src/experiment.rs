//! Batches of seeded trials: configuration, validation, parallel execution
//! and the CSV / JSON exports.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run_trial, Algorithm, InitParams, TrialSeries, TrialSetup};
use crate::error::{GossipError, Result};
use crate::geodesic::SpaceKind;
use crate::network::Graph;
use crate::stats::{envelope, fit_log_slope, Envelope, LogFit, MetricsRecord};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Complete,
    Path,
    File(PathBuf),
}

impl GraphSpec {
    pub fn build(&self, n: usize) -> Result<Graph> {
        match self {
            GraphSpec::Complete => Graph::complete(n),
            GraphSpec::Path => Graph::path(n),
            GraphSpec::File(p) => Graph::from_edge_list_file(n, p),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Complete => f.write_str("complete"),
            GraphSpec::Path => f.write_str("path"),
            GraphSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = GossipError;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "complete" => Ok(GraphSpec::Complete),
            "path" => Ok(GraphSpec::Path),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(GraphSpec::File(PathBuf::from(p))),
                _ => Err(GossipError::Parse(format!(
                    "unknown graph `{s}` (expected complete, path or file:PATH)"
                ))),
            },
        }
    }
}

impl Serialize for GraphSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub space: SpaceKind,
    pub dim: usize,
    pub graph: GraphSpec,
    pub agents: usize,
    pub iters: u64,
    pub trials: usize,
    pub seed: u64,
    pub algo: Algorithm,
    /// `None` selects the space's own curvature bound.
    pub kappa: Option<f64>,
    pub record_every: u64,
    pub window: f64,
    pub coverage: f64,
    pub tree_max_len: usize,
    pub rsgd_symmetric: bool,
    /// Worker threads; does not affect the outputs.
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            space: SpaceKind::Spd,
            dim: 2,
            graph: GraphSpec::Complete,
            agents: 30,
            iters: 3000,
            trials: 50,
            seed: 0,
            algo: Algorithm::Midpoint,
            kappa: None,
            record_every: 1,
            window: 0.5,
            coverage: 0.95,
            tree_max_len: 30,
            rsgd_symmetric: false,
            jobs: None,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> GossipError {
    GossipError::InvalidConfig { field: field.to_string(), reason: reason.into() }
}

fn parse_field<T: FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| invalid(field, format!("cannot parse `{value}`: {e}")))
}

impl ExperimentConfig {
    /// Sets one field from its textual form. Keys match the CLI flag names;
    /// `-` and `_` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "space" => self.space = parse_field("space", value)?,
            "dim" => self.dim = parse_field("dim", value)?,
            "graph" => self.graph = parse_field("graph", value)?,
            "agents" => self.agents = parse_field("agents", value)?,
            "iters" => self.iters = parse_field("iters", value)?,
            "trials" => self.trials = parse_field("trials", value)?,
            "seed" => self.seed = parse_field("seed", value)?,
            "algo" => self.algo = parse_field("algo", value)?,
            "kappa" => {
                self.kappa = match value.trim() {
                    "" | "auto" => None,
                    v => Some(parse_field("kappa", v)?),
                }
            }
            "record_every" => self.record_every = parse_field("record_every", value)?,
            "window" => self.window = parse_field("window", value)?,
            "coverage" => self.coverage = parse_field("coverage", value)?,
            "tree_max_len" => self.tree_max_len = parse_field("tree_max_len", value)?,
            "rsgd_symmetric" => self.rsgd_symmetric = parse_field("rsgd_symmetric", value)?,
            "jobs" => self.jobs = Some(parse_field("jobs", value)?),
            other => return Err(invalid(other, "unknown configuration key")),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(GossipError::Parse(format!(
                    "config line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
        self.apply_file_text(&text)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or_else(|| self.space.default_kappa())
    }

    /// Checks every field and builds the communication graph.
    pub fn validate(&self) -> Result<Graph> {
        if self.agents < 2 {
            return Err(invalid("agents", format!("need at least 2 agents, got {}", self.agents)));
        }
        if self.trials < 1 {
            return Err(invalid("trials", "need at least one trial"));
        }
        if self.record_every < 1 {
            return Err(invalid("record_every", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.window) {
            return Err(invalid("window", format!("{} is outside [0, 1)", self.window)));
        }
        if !(self.coverage > 0.0 && self.coverage < 1.0) {
            return Err(invalid("coverage", format!("{} is outside (0, 1)", self.coverage)));
        }
        if self.space == SpaceKind::Euclidean && self.dim < 1 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if self.space == SpaceKind::Tree && self.tree_max_len < 1 {
            return Err(invalid("tree_max_len", "must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(invalid("jobs", "must be at least 1"));
        }
        let kappa = self.kappa();
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(invalid("kappa", format!("must be finite and nonnegative, got {kappa}")));
        }
        if kappa < self.space.default_kappa() {
            return Err(invalid(
                "kappa",
                format!(
                    "the {} space is not CAT({kappa}); use kappa >= {}",
                    self.space,
                    self.space.default_kappa()
                ),
            ));
        }
        self.algo.check_supported(self.space).map_err(|e| invalid("algo", e.to_string()))?;
        self.graph.build(self.agents).map_err(|e| invalid("graph", e.to_string()))
    }

    pub fn trial_setup(&self) -> TrialSetup {
        TrialSetup {
            kind: self.space,
            algorithm: self.algo,
            kappa: self.kappa(),
            seed: self.seed,
            init: InitParams { dim: self.dim, tree_max_len: self.tree_max_len, wishart_q: 3 },
            rsgd_symmetric: self.rsgd_symmetric,
        }
    }

    /// The functional whose decay is fitted: `sigma^2_k` when `k > 0`,
    /// otherwise `sigma^2`.
    pub fn fit_metric(&self) -> fn(&MetricsRecord) -> f64 {
        if self.kappa() > 0.0 {
            |m| m.sigma2_kappa.unwrap_or(f64::NAN)
        } else {
            |m| m.sigma2
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFit {
    pub seed: u64,
    pub slope: Option<f64>,
    pub r2: Option<f64>,
    pub final_sigma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    /// `sigma2_kappa` or `sigma2`.
    pub fit_metric: &'static str,
    /// Last iteration before any trial reached consensus; fits stop there.
    pub fit_horizon: Option<u64>,
    pub per_trial: Vec<TrialFit>,
    pub mean_curve_fit: Option<LogFit>,
    pub envelope: Option<Envelope>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub series: Vec<TrialSeries>,
    pub summary: Summary,
}

/// Number of leading records taken before consensus (diameter below the
/// consensus threshold). Past that point the logarithm only measures
/// rounding noise.
fn pre_consensus_len(s: &TrialSeries) -> usize {
    s.records
        .iter()
        .position(|r| r.metrics.diameter < tol::CONSENSUS_DIAMETER)
        .unwrap_or(s.records.len())
}

fn trial_fit(s: &TrialSeries, metric: fn(&MetricsRecord) -> f64, window: f64) -> Option<LogFit> {
    let len = pre_consensus_len(s);
    let iters: Vec<f64> = s.records[..len].iter().map(|r| r.iter as f64).collect();
    let values: Vec<f64> = s.records[..len].iter().map(|r| metric(&r.metrics)).collect();
    fit_log_slope(&iters, &values, window).ok()
}

/// Fit of the cross-trial mean of the log-metric, on the records where no
/// trial has reached consensus yet.
pub fn mean_curve_fit(
    series: &[TrialSeries],
    metric: fn(&MetricsRecord) -> f64,
    window: f64,
) -> (Option<u64>, Option<LogFit>) {
    let Some(len) = series.iter().map(pre_consensus_len).min() else {
        return (None, None);
    };
    if len == 0 {
        return (None, None);
    }
    let horizon = series[0].records[len - 1].iter;
    let iters: Vec<f64> = series[0].records[..len].iter().map(|r| r.iter as f64).collect();
    let mean_log: Vec<f64> = (0..len)
        .map(|i| series.iter().map(|s| metric(&s.records[i].metrics).ln()).sum::<f64>() / series.len() as f64)
        .collect();
    // the fit takes logarithms itself
    let values: Vec<f64> = mean_log.iter().map(|x| x.exp()).collect();
    (Some(horizon), fit_log_slope(&iters, &values, window).ok())
}

pub fn summarize(cfg: &ExperimentConfig, series: &[TrialSeries]) -> Summary {
    let metric = cfg.fit_metric();
    let per_trial = series
        .iter()
        .map(|s| {
            let fit = trial_fit(s, metric, cfg.window);
            TrialFit {
                seed: s.seed,
                slope: fit.map(|f| f.slope),
                r2: fit.map(|f| f.r2),
                final_sigma2: s.records.last().map_or(f64::NAN, |r| r.metrics.sigma2),
            }
        })
        .collect();
    let (fit_horizon, mean_fit) = mean_curve_fit(series, metric, cfg.window);
    let env = if series.len() >= 2 {
        let values: Vec<Vec<f64>> = series.iter().map(|s| s.values(metric)).collect();
        envelope(&values, cfg.coverage).ok()
    } else {
        None
    };
    Summary {
        config: cfg.clone(),
        fit_metric: if cfg.kappa() > 0.0 { "sigma2_kappa" } else { "sigma2" },
        fit_horizon,
        per_trial,
        mean_curve_fit: mean_fit,
        envelope: env,
    }
}

/// Runs all trials (in parallel when `jobs > 1`) and summarizes them. The
/// result does not depend on the number of workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let graph = cfg.validate()?;
    let setup = cfg.trial_setup();
    let run = |i: usize| run_trial(&setup, &graph, i, cfg.iters, cfg.record_every);
    let jobs = cfg
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .min(cfg.trials);
    let results: Vec<Result<TrialSeries>> = if jobs <= 1 {
        (0..cfg.trials).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| GossipError::numerical(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..cfg.trials).into_par_iter().map(run).collect())
    };
    let series = results.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &series);
    Ok(ExperimentOutput { series, summary })
}

pub const CSV_HEADER: &str = "trial,iter,sigma2,delta,sigma2_kappa,delta_kappa,diameter,sigma2_frobenius";

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// One row per trial and recorded iteration; floats carry 17 significant
/// digits, absent quantities are left empty.
pub fn write_csv<W: Write>(series: &[TrialSeries], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in series {
        for r in &s.records {
            let m = &r.metrics;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.trial,
                r.iter,
                fmt_float(m.sigma2),
                fmt_float(m.delta),
                fmt_opt(m.sigma2_kappa),
                fmt_opt(m.delta_kappa),
                fmt_float(m.diameter),
                fmt_opt(m.sigma2_frobenius),
            )?;
        }
    }
    Ok(())
}

pub fn write_summary<W: Write>(summary: &Summary, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, summary).map_err(std::io::Error::other)?;
    writeln!(out)
}

impl ExperimentOutput {
    pub fn write_files(&self, csv: &Path, summary: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(csv)?);
        write_csv(&self.series, &mut f)?;
        f.flush()?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(summary)?);
        write_summary(&self.summary, &mut f)?;
        f.flush()
    }
}
