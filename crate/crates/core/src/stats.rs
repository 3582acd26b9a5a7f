//! Variance and disagreement functionals, their curvature-adjusted versions,
//! the exact one-step expectation, log-linear fits and cross-trial bands.

use serde::Serialize;

use crate::engine::{apply_update, Algorithm, Configuration};
use crate::error::{GossipError, Result};
use crate::geodesic::{self, SpaceKind, SpacePoint};
use crate::model::chi_unchecked;
use crate::network::Graph;

/// Symmetric table of pairwise distances of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn compute(c: &Configuration) -> Result<Self> {
        let n = c.len();
        let mut m = DistanceMatrix { n, d: vec![0.0; n * n] };
        for v in 0..n {
            for w in v + 1..n {
                let x = geodesic::distance(c.kind(), c.point(v), c.point(w))?;
                m.set(v, w, x);
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, v: usize, w: usize) -> f64 {
        self.d[v * self.n + w]
    }

    pub(crate) fn set(&mut self, v: usize, w: usize, x: f64) {
        self.d[v * self.n + w] = x;
        self.d[w * self.n + v] = x;
    }

    /// Recomputes the distances from `v` to every other agent.
    pub(crate) fn refresh_row(&mut self, c: &Configuration, v: usize) -> Result<()> {
        for u in 0..self.n {
            if u != v {
                let x = geodesic::distance(c.kind(), c.point(v), c.point(u))?;
                self.set(v, u, x);
            }
        }
        Ok(())
    }

    /// Copies row `from` into row `to`, for agents holding identical points.
    pub(crate) fn copy_row(&mut self, from: usize, to: usize) {
        for u in 0..self.n {
            if u != to && u != from {
                let x = self.get(from, u);
                self.set(to, u, x);
            }
        }
        self.set(from, to, 0.0);
    }

    /// Unordered pairs `v < w` with their distances.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |v| (v + 1..self.n).map(move |w| (v, w, self.get(v, w))))
    }

    pub fn diameter(&self) -> f64 {
        self.pairs().map(|(_, _, x)| x).fold(0.0, f64::max)
    }
}

fn check_graph(n: usize, g: &Graph) -> Result<()> {
    if g.n() == n {
        Ok(())
    } else {
        Err(GossipError::SizeMismatch(format!(
            "configuration has {n} agents but the graph has {}",
            g.n()
        )))
    }
}

fn check_kappa_domain(kappa: f64, d: f64) -> Result<()> {
    if !(kappa > 0.0) {
        return Err(GossipError::domain(format!("curvature functionals need kappa > 0, got {kappa}")));
    }
    let limit = std::f64::consts::PI / (2.0 * kappa.sqrt());
    if d > limit + crate::tol::DOMAIN_GUARD {
        return Err(GossipError::domain(format!(
            "distance {d} exceeds pi / (2 sqrt(kappa)) = {limit}"
        )));
    }
    Ok(())
}

fn edge_weight(g: &Graph, v: usize, w: usize) -> f64 {
    1.0 / g.degree(v) as f64 + 1.0 / g.degree(w) as f64
}

/// `sigma^2 = (1/N) sum_{v<w} d^2(x_v, x_w)`.
pub fn variance_from(dm: &DistanceMatrix) -> f64 {
    dm.pairs().map(|(_, _, x)| x * x).sum::<f64>() / dm.n() as f64
}

/// `Delta = sum_{v~w} (1/deg v + 1/deg w) d^2(x_v, x_w)`.
pub fn disagreement_from(dm: &DistanceMatrix, g: &Graph) -> Result<f64> {
    check_graph(dm.n(), g)?;
    Ok(g.edges().map(|(v, w)| edge_weight(g, v, w) * dm.get(v, w).powi(2)).sum())
}

/// `sigma^2_k = (2/N) sum_{v<w} chi_k(d(x_v, x_w))`.
pub fn variance_kappa_from(dm: &DistanceMatrix, kappa: f64) -> Result<f64> {
    let mut s = 0.0;
    for (_, _, x) in dm.pairs() {
        check_kappa_domain(kappa, x)?;
        s += chi_unchecked(kappa, x);
    }
    if dm.n() < 2 {
        check_kappa_domain(kappa, 0.0)?;
    }
    Ok(2.0 * s / dm.n() as f64)
}

/// `Delta_k = (1/2) sum_{v~w} (1/deg v + 1/deg w) chi_k(d(x_v, x_w))`.
pub fn disagreement_kappa_from(dm: &DistanceMatrix, g: &Graph, kappa: f64) -> Result<f64> {
    check_graph(dm.n(), g)?;
    let mut s = 0.0;
    for (v, w) in g.edges() {
        let x = dm.get(v, w);
        check_kappa_domain(kappa, x)?;
        s += edge_weight(g, v, w) * chi_unchecked(kappa, x);
    }
    Ok(0.5 * s)
}

pub fn variance(c: &Configuration) -> Result<f64> {
    Ok(variance_from(&DistanceMatrix::compute(c)?))
}

pub fn disagreement(c: &Configuration, g: &Graph) -> Result<f64> {
    check_graph(c.len(), g)?;
    disagreement_from(&DistanceMatrix::compute(c)?, g)
}

pub fn variance_kappa(c: &Configuration, kappa: f64) -> Result<f64> {
    variance_kappa_from(&DistanceMatrix::compute(c)?, kappa)
}

pub fn disagreement_kappa(c: &Configuration, g: &Graph, kappa: f64) -> Result<f64> {
    check_graph(c.len(), g)?;
    disagreement_kappa_from(&DistanceMatrix::compute(c)?, g, kappa)
}

/// `(1/N) sum_{v<w} ||M_v - M_w||_F^2`: the variance of an SPD configuration
/// measured in the ambient Frobenius norm.
pub fn variance_frobenius(c: &Configuration) -> Result<f64> {
    let mats = c
        .points()
        .iter()
        .map(|p| match p {
            SpacePoint::Spd(m) => Ok(m),
            other => Err(GossipError::UnsupportedSpace { op: "variance_frobenius", space: other.kind() }),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = 0.0;
    for v in 0..mats.len() {
        for w in v + 1..mats.len() {
            s += mats[v].frobenius_distance(mats[w]).powi(2);
        }
    }
    Ok(s / mats.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub sigma2: f64,
    pub delta: f64,
    pub sigma2_kappa: Option<f64>,
    pub delta_kappa: Option<f64>,
    pub diameter: f64,
    /// Frobenius-norm variance, SPD configurations only.
    pub sigma2_frobenius: Option<f64>,
}

impl MetricsRecord {
    pub fn compute(c: &Configuration, dm: &DistanceMatrix, g: &Graph, kappa: f64) -> Result<Self> {
        let (sigma2_kappa, delta_kappa) = if kappa > 0.0 {
            (Some(variance_kappa_from(dm, kappa)?), Some(disagreement_kappa_from(dm, g, kappa)?))
        } else {
            (None, None)
        };
        let sigma2_frobenius =
            if c.kind() == SpaceKind::Spd { Some(variance_frobenius(c)?) } else { None };
        Ok(MetricsRecord {
            sigma2: variance_from(dm),
            delta: disagreement_from(dm, g)?,
            sigma2_kappa,
            delta_kappa,
            diameter: dm.diameter(),
            sigma2_frobenius,
        })
    }
}

const ORACLE_MAX_AGENTS: usize = 64;

/// Exact `E[f(X_{k+1}) - f(X_k)]` over one midpoint step, enumerating the
/// ordered pairs `(v, w)` with probability `(1/N)(1/deg v)`.
fn enumerate_step(
    c: &Configuration,
    g: &Graph,
    f: impl Fn(&Configuration) -> Result<f64>,
) -> Result<f64> {
    check_graph(c.len(), g)?;
    if c.len() > ORACLE_MAX_AGENTS {
        return Err(GossipError::domain(format!(
            "exact enumeration is limited to {ORACLE_MAX_AGENTS} agents, got {}",
            c.len()
        )));
    }
    let base = f(c)?;
    let n = c.len() as f64;
    let mut total = 0.0;
    for v in 0..c.len() {
        let p = 1.0 / (n * g.degree(v) as f64);
        for &w in g.neighbors(v) {
            let mut next = c.clone();
            apply_update(Algorithm::Midpoint, &mut next, v, w, 1, false)?;
            total += p * (f(&next)? - base);
        }
    }
    Ok(total)
}

/// Expected one-step change of `sigma^2` under midpoint gossip on a CAT(0)
/// space.
pub fn expected_one_step_change(c: &Configuration, g: &Graph) -> Result<f64> {
    if !c.kind().is_cat0() {
        return Err(GossipError::UnsupportedSpace { op: "expected_one_step_change", space: c.kind() });
    }
    enumerate_step(c, g, variance)
}

/// Expected one-step change of `sigma^2_k` under midpoint gossip.
pub fn expected_one_step_change_kappa(c: &Configuration, g: &Graph, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(GossipError::domain(format!("kappa must be positive, got {kappa}")));
    }
    enumerate_step(c, g, |x| variance_kappa(x, kappa))
}

/// Ordinary least squares of `log(value)` against the iteration index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub const MIN_FIT_POINTS: usize = 10;

/// Fits `log(values)` on the points with `iters >= window * last_iter`.
pub fn fit_log_slope(iters: &[f64], values: &[f64], window: f64) -> Result<LogFit> {
    if iters.len() != values.len() {
        return Err(GossipError::LengthMismatch(format!(
            "{} iterations but {} values",
            iters.len(),
            values.len()
        )));
    }
    if !(0.0..1.0).contains(&window) {
        return Err(GossipError::domain(format!("fit window {window} outside [0, 1)")));
    }
    let Some(&last) = iters.last() else {
        return Err(GossipError::DegenerateSeries("empty series".into()));
    };
    let start = window * last;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&k, &v) in iters.iter().zip(values) {
        if k < start {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(GossipError::DegenerateSeries(format!(
                "value {v} at iteration {k} cannot be log-transformed"
            )));
        }
        xs.push(k);
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(GossipError::DegenerateSeries(format!(
            "{} points in the fit window, need at least {MIN_FIT_POINTS}",
            xs.len()
        )));
    }
    Ok(ols(&xs, &ys))
}

fn ols(xs: &[f64], ys: &[f64]) -> LogFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    LogFit { slope, intercept, r2 }
}

/// Empirical quantile of sorted data: the order statistic of rank
/// `ceil(n p)`, clamped to `[1, n]`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let k = ((n as f64 * p).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

/// Per-iteration bands of `log(values)` across trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub coverage: f64,
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Central band holding a fraction `coverage` of the trials, plus the median.
pub fn envelope(trials: &[Vec<f64>], coverage: f64) -> Result<Envelope> {
    if trials.len() < 2 {
        return Err(GossipError::LengthMismatch(format!(
            "envelopes need at least 2 trials, got {}",
            trials.len()
        )));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(GossipError::domain(format!("coverage {coverage} outside (0, 1)")));
    }
    let len = trials[0].len();
    if let Some(t) = trials.iter().find(|t| t.len() != len) {
        return Err(GossipError::LengthMismatch(format!(
            "trial series of lengths {len} and {}",
            t.len()
        )));
    }
    let tail = (1.0 - coverage) / 2.0;
    let mut out = Envelope {
        coverage,
        lower: Vec::with_capacity(len),
        median: Vec::with_capacity(len),
        upper: Vec::with_capacity(len),
    };
    let mut column = vec![0.0; trials.len()];
    for i in 0..len {
        for (c, t) in column.iter_mut().zip(trials) {
            *c = t[i].ln();
        }
        column.sort_by(f64::total_cmp);
        out.lower.push(quantile(&column, tail));
        out.median.push(quantile(&column, 0.5));
        out.upper.push(quantile(&column, 1.0 - tail));
    }
    Ok(out)
}
