//! Seeded sampling runs of the comparison inequalities, the functional
//! sandwich bounds and the one-step contraction, reported as worst-case
//! slacks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{initial_configuration, sample_point, Algorithm, Configuration, InitParams, Trial, TrialSetup};
use crate::error::{GossipError, Result};
use crate::geodesic::{SpaceKind, SpacePoint};
use crate::model::{check_bruhat_tits, check_cat_inequality, check_midpoint_cosine, chi_kappa};
use crate::network::Graph;
use crate::stats::{
    disagreement, disagreement_kappa, expected_one_step_change, expected_one_step_change_kappa,
    variance, variance_kappa, DistanceMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteSelector {
    Cat0,
    CatK,
    All,
}

impl FromStr for SuiteSelector {
    type Err = GossipError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cat0" => Ok(SuiteSelector::Cat0),
            "catk" => Ok(SuiteSelector::CatK),
            "all" => Ok(SuiteSelector::All),
            other => Err(GossipError::Parse(format!("unknown selector `{other}` (cat0, catk, all)"))),
        }
    }
}

/// Worst slack of one inequality over its samples; the check passes when
/// `worst_slack >= -tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub samples: usize,
    pub worst_slack: f64,
    pub tolerance: f64,
    /// Description of the sample that produced the worst slack.
    pub witness: String,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.worst_slack >= -self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteReport {
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<32} samples={:<6} worst_slack={:+.6e} tolerance={:.0e}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.samples,
                c.worst_slack,
                c.tolerance
            )?;
            if !c.passed() {
                writeln!(f, "     witness: {}", c.witness)?;
            }
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

struct Tracker {
    name: String,
    samples: usize,
    worst: f64,
    tolerance: f64,
    witness: String,
}

impl Tracker {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Tracker { name: name.into(), samples: 0, worst: f64::INFINITY, tolerance, witness: String::new() }
    }

    fn record(&mut self, slack: f64, witness: impl FnOnce() -> String) {
        self.samples += 1;
        if slack < self.worst || slack.is_nan() {
            self.worst = slack;
            self.witness = witness();
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name,
            samples: self.samples,
            worst_slack: self.worst,
            tolerance: self.tolerance,
            witness: self.witness,
        }
    }
}

fn params() -> InitParams {
    InitParams { dim: 3, ..InitParams::default() }
}

fn triple(kind: SpaceKind, rng: &mut ChaCha8Rng) -> Result<[SpacePoint; 3]> {
    let p = params();
    Ok([sample_point(kind, &p, rng)?, sample_point(kind, &p, rng)?, sample_point(kind, &p, rng)?])
}

fn bruhat_tits(kind: SpaceKind, n: usize, tol: f64, rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut t = Tracker::new(format!("bruhat_tits/{kind}"), tol);
    for _ in 0..n {
        let [p, q, r] = triple(kind, rng)?;
        let s = check_bruhat_tits(kind, &p, &q, &r)?;
        t.record(s, || format!("{p:?} {q:?} {r:?}"));
    }
    Ok(t.finish())
}

fn midpoint_cosine(kind: SpaceKind, n: usize, rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let kappa = kind.default_kappa();
    let mut t = Tracker::new(format!("midpoint_cosine/{kind}"), 1e-9);
    for _ in 0..n {
        let [p, q, r] = triple(kind, rng)?;
        let s = check_midpoint_cosine(kind, kappa, &p, &q, &r)?;
        t.record(s, || format!("{p:?} {q:?} {r:?}"));
    }
    Ok(t.finish())
}

fn cat_inequality(kind: SpaceKind, n: usize, rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let kappa = kind.default_kappa();
    let mut t = Tracker::new(format!("cat_inequality/{kind}"), 1e-8);
    for _ in 0..n {
        let [p, q, r] = triple(kind, rng)?;
        let s = check_cat_inequality(kind, kappa, &p, &q, &r, 25)?;
        t.record(s, || format!("{p:?} {q:?} {r:?}"));
    }
    Ok(t.finish())
}

/// A few small connected graphs of different shapes.
pub fn test_graphs(n: usize) -> Result<Vec<Graph>> {
    let cycle: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    let star: Vec<_> = (1..n).map(|v| (0, v)).collect();
    let mut lollipop: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    lollipop.push((0, 2));
    Ok(vec![
        Graph::complete(n)?,
        Graph::path(n)?,
        Graph::from_edges(n, &cycle)?,
        Graph::from_edges(n, &star)?,
        Graph::from_edges(n, &lollipop)?,
    ])
}

fn random_configuration(kind: SpaceKind, n: usize, rng: &mut ChaCha8Rng) -> Result<Configuration> {
    initial_configuration(kind, n, &params(), kind.default_kappa(), rng)
}

fn sandwich(kind: SpaceKind, configs: usize, rng: &mut ChaCha8Rng) -> Result<[CheckOutcome; 2]> {
    let mut lo = Tracker::new(format!("sandwich_lower/{kind}"), 1e-10);
    let mut hi = Tracker::new(format!("sandwich_upper/{kind}"), 1e-10);
    let graphs = test_graphs(6)?;
    for i in 0..configs {
        let g = &graphs[i % graphs.len()];
        let c = random_configuration(kind, g.n(), rng)?;
        let s2 = variance(&c)?;
        let d = disagreement(&c, g)?;
        let n = g.n() as f64;
        lo.record(s2 - d / (2.0 * n), || format!("graph #{} {:?}", i % graphs.len(), c.points()));
        hi.record(g.c_g_constant() * d - s2, || format!("graph #{} {:?}", i % graphs.len(), c.points()));
    }
    Ok([lo.finish(), hi.finish()])
}

fn sandwich_kappa(kind: SpaceKind, configs: usize, rng: &mut ChaCha8Rng) -> Result<[CheckOutcome; 2]> {
    let kappa = kind.default_kappa();
    let mut lo = Tracker::new(format!("sandwich_kappa_lower/{kind}"), 1e-10);
    let mut hi = Tracker::new(format!("sandwich_kappa_upper/{kind}"), 1e-10);
    let graphs = test_graphs(6)?;
    for i in 0..configs {
        let g = &graphs[i % graphs.len()];
        let c = random_configuration(kind, g.n(), rng)?;
        let s2 = variance_kappa(&c, kappa)?;
        let d = disagreement_kappa(&c, g, kappa)?;
        let n = g.n() as f64;
        let c_kappa = PI * PI * g.c_g_constant();
        lo.record(s2 - kappa / (n * PI * PI) * d, || format!("{:?}", c.points()));
        hi.record(c_kappa * d - s2, || format!("{:?}", c.points()));
    }
    Ok([lo.finish(), hi.finish()])
}

/// `(2k/pi^2) x^2 <= chi_k(x) <= (k/2) x^2` on a grid of `[0, pi/(2 sqrt k))`.
fn chi_envelope(kappa: f64, points: usize) -> Result<CheckOutcome> {
    let mut t = Tracker::new(format!("chi_envelope/kappa={kappa}"), 0.0);
    let end = PI / (2.0 * kappa.sqrt());
    for i in 0..points {
        let x = end * i as f64 / points as f64;
        let chi = chi_kappa(kappa, x)?;
        let lower = 2.0 * kappa / (PI * PI) * x * x;
        let upper = 0.5 * kappa * x * x;
        t.record((chi - lower).min(upper - chi), || format!("x = {x:e}"));
    }
    Ok(t.finish())
}

fn one_step(kind: SpaceKind, configs: usize, rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let mut t = Tracker::new(format!("one_step/{kind}"), 1e-9);
    let graphs = [Graph::complete(8)?, Graph::path(8)?];
    for i in 0..configs {
        let g = &graphs[i % 2];
        let c = random_configuration(kind, 8, rng)?;
        let e = expected_one_step_change(&c, g)?;
        let bound = -disagreement(&c, g)? / 16.0;
        t.record(bound - e, || format!("{} {:?}", if i % 2 == 0 { "K8" } else { "P8" }, c.points()));
    }
    Ok(t.finish())
}

fn one_step_kappa(kind: SpaceKind, configs: usize, rng: &mut ChaCha8Rng) -> Result<CheckOutcome> {
    let kappa = kind.default_kappa();
    let mut t = Tracker::new(format!("one_step_kappa/{kind}"), 0.0);
    let graphs = [Graph::complete(3)?, Graph::path(3)?];
    for i in 0..configs {
        let g = &graphs[i % 2];
        let c = random_configuration(kind, 3, rng)?;
        let e = expected_one_step_change_kappa(&c, g, kappa)?;
        // strictly negative away from consensus
        t.record(-e, || format!("{:?}", c.points()));
    }
    Ok(t.finish())
}

/// `N (f(X_k) - f(X_{k-1}))` from the pairs that changed, so the value is
/// not swamped by the rounding of the full sums.
fn local_change(before: &DistanceMatrix, after: &DistanceMatrix, v: usize, w: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut s = 0.0;
    for u in 0..before.n() {
        for &x in &[v, w] {
            if u != x && !(x == w && u == v) {
                s += f(after.get(x, u)) - f(before.get(x, u));
            }
        }
    }
    s
}

/// Along seeded midpoint runs, every executed step satisfies the pathwise
/// decrease `N dsigma^2 <= -(N/2) d^2` (`k = 0`) or `N dsigma^2_k <= -2 chi(d)`.
fn pathwise(kind: SpaceKind, steps: u64, seed: u64) -> Result<CheckOutcome> {
    let kappa = kind.default_kappa();
    let name = if kappa > 0.0 { format!("pathwise_kappa/{kind}") } else { format!("pathwise/{kind}") };
    let mut t = Tracker::new(name, 1e-9);
    let g = Graph::complete(10)?;
    let mut setup = TrialSetup::new(kind, Algorithm::Midpoint, seed);
    setup.init = params();
    let mut trial = Trial::new(&setup, &g, 0)?;
    let n = g.n() as f64;
    for _ in 0..steps {
        let before = trial.distances().clone();
        let e = trial.step()?;
        let after = trial.distances();
        let slack = if kappa > 0.0 {
            let change = 2.0 * local_change(&before, after, e.v, e.w, |x| chi_kappa(kappa, x).unwrap_or(f64::NAN));
            -2.0 * chi_kappa(kappa, e.pre_distance)? - change
        } else {
            let change = local_change(&before, after, e.v, e.w, |x| x * x);
            -0.5 * n * e.pre_distance.powi(2) - change
        };
        t.record(slack, || format!("iteration {} pair ({}, {})", e.iter, e.v, e.w));
    }
    Ok(t.finish())
}

/// Runs the selected checks with a fixed seed; the report is a pure function
/// of `(selector, seed)`.
pub fn run_property_suite(selector: SuiteSelector, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    if matches!(selector, SuiteSelector::Cat0 | SuiteSelector::All) {
        checks.push(bruhat_tits(SpaceKind::Euclidean, 1000, 1e-10, &mut rng)?);
        checks.push(bruhat_tits(SpaceKind::Spd, 1000, 1e-9, &mut rng)?);
        checks.push(bruhat_tits(SpaceKind::Tree, 1000, 1e-9, &mut rng)?);
        for kind in [SpaceKind::Euclidean, SpaceKind::Spd, SpaceKind::Tree] {
            checks.push(cat_inequality(kind, 200, &mut rng)?);
        }
        for kind in [SpaceKind::Euclidean, SpaceKind::Spd, SpaceKind::Tree] {
            checks.extend(sandwich(kind, 1000, &mut rng)?);
        }
        for kind in [SpaceKind::Euclidean, SpaceKind::Spd, SpaceKind::Tree] {
            checks.push(one_step(kind, 100, &mut rng)?);
        }
        for kind in [SpaceKind::Euclidean, SpaceKind::Spd, SpaceKind::Tree] {
            checks.push(pathwise(kind, 500, rng.random())?);
        }
    }
    if matches!(selector, SuiteSelector::CatK | SuiteSelector::All) {
        for kind in [SpaceKind::Sphere, SpaceKind::So3] {
            checks.push(midpoint_cosine(kind, 1000, &mut rng)?);
        }
        for kind in [SpaceKind::Sphere, SpaceKind::So3] {
            checks.push(cat_inequality(kind, 200, &mut rng)?);
        }
        for kappa in [0.25, 1.0, 4.0] {
            checks.push(chi_envelope(kappa, 10_000)?);
        }
        for kind in [SpaceKind::Sphere, SpaceKind::So3] {
            checks.extend(sandwich_kappa(kind, 1000, &mut rng)?);
        }
        for kind in [SpaceKind::Sphere, SpaceKind::So3] {
            checks.push(one_step_kappa(kind, 100, &mut rng)?);
        }
        for kind in [SpaceKind::Sphere, SpaceKind::So3] {
            checks.push(pathwise(kind, 500, rng.random())?);
        }
    }
    Ok(SuiteReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_parses() {
        assert_eq!("CAT0".parse::<SuiteSelector>().unwrap(), SuiteSelector::Cat0);
        assert!("cat1".parse::<SuiteSelector>().is_err());
    }

    #[test]
    fn report_lists_failures_with_witness() {
        let report = SuiteReport {
            checks: vec![CheckOutcome {
                name: "demo".into(),
                samples: 3,
                worst_slack: -1.0,
                tolerance: 1e-9,
                witness: "x = 1".into(),
            }],
        };
        assert!(!report.passed());
        let text = report.to_string();
        assert!(text.starts_with("FAIL demo"));
        assert!(text.contains("witness: x = 1"));
    }
}
