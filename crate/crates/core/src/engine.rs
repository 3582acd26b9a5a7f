//! The gossip state machine: configurations, update rules, initial samplers
//! and seeded trials.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GossipError, Result};
use crate::geodesic::{self, CurvatureBound, SpaceKind, SpacePoint};
use crate::network::Graph;
use crate::spaces::linalg::{norm, scale, sym_eigen, Mat3, Vec3};
use crate::spaces::{so3_exp, Letter, SpdMatrix, SphereVec, TreePoint, Word};
use crate::stats::{DistanceMatrix, MetricsRecord};
use crate::tol;

/// The states `X_k = (x_1, ..., x_N)` of all agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    kind: SpaceKind,
    points: Vec<SpacePoint>,
}

impl Configuration {
    pub fn new(kind: SpaceKind, points: Vec<SpacePoint>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.kind() != kind) {
            return Err(GossipError::TagMismatch { expected: kind, found: p.kind() });
        }
        if let (SpaceKind::Euclidean, Some(SpacePoint::Euclidean(first))) = (kind, points.first()) {
            let dim = first.len();
            if points.iter().any(|p| matches!(p, SpacePoint::Euclidean(x) if x.len() != dim)) {
                return Err(GossipError::SizeMismatch("euclidean points of different dimensions".into()));
            }
        }
        Ok(Configuration { kind, points })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn points(&self) -> &[SpacePoint] {
        &self.points
    }

    pub fn point(&self, v: usize) -> &SpacePoint {
        &self.points[v]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> Result<f64> {
        Ok(DistanceMatrix::compute(self)?.diameter())
    }

    pub fn into_points(self) -> Vec<SpacePoint> {
        self.points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Both agents move to the geodesic midpoint.
    Midpoint,
    /// Both agents move to the entrywise average (linear spaces only).
    Arithmetic,
    /// The woken agent takes a geodesic step of size `1/k` towards its
    /// neighbour (SPD only).
    Rsgd,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Midpoint => "midpoint",
            Algorithm::Arithmetic => "arithmetic",
            Algorithm::Rsgd => "rsgd",
        }
    }

    pub fn check_supported(&self, kind: SpaceKind) -> Result<()> {
        let ok = match self {
            Algorithm::Midpoint => true,
            Algorithm::Arithmetic => kind.is_linear(),
            Algorithm::Rsgd => kind == SpaceKind::Spd,
        };
        if ok {
            Ok(())
        } else {
            Err(GossipError::UnsupportedSpace { op: self.as_str(), space: kind })
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = GossipError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "midpoint" => Ok(Algorithm::Midpoint),
            "arithmetic" => Ok(Algorithm::Arithmetic),
            "rsgd" => Ok(Algorithm::Rsgd),
            other => Err(GossipError::Parse(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Agents `v` (woken) and `w` (chosen neighbour) interacted at tick `iter`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GossipEvent {
    pub iter: u64,
    pub v: usize,
    pub w: usize,
    pub pre_distance: f64,
}

/// Applies one interaction between `v` and `w` at tick `k >= 1`.
pub fn apply_update(
    algo: Algorithm,
    c: &mut Configuration,
    v: usize,
    w: usize,
    k: u64,
    symmetric: bool,
) -> Result<()> {
    algo.check_supported(c.kind)?;
    let kind = c.kind;
    match algo {
        Algorithm::Midpoint => {
            let m = geodesic::midpoint(kind, &c.points[v], &c.points[w])?;
            c.points[w] = m.clone();
            c.points[v] = m;
        }
        Algorithm::Arithmetic => {
            let avg = match (&c.points[v], &c.points[w]) {
                (SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => {
                    if a.len() != b.len() {
                        return Err(GossipError::SizeMismatch("euclidean dimensions differ".into()));
                    }
                    SpacePoint::Euclidean(a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect())
                }
                (SpacePoint::Spd(a), SpacePoint::Spd(b)) => SpacePoint::Spd(a.average(b)),
                _ => unreachable!("support checked above"),
            };
            c.points[w] = avg.clone();
            c.points[v] = avg;
        }
        Algorithm::Rsgd => {
            if k == 0 {
                return Err(GossipError::domain("step sizes 1/k need k >= 1"));
            }
            let gamma = 1.0 / k as f64;
            let xv = geodesic::geodesic_point(kind, &c.points[v], &c.points[w], gamma)?;
            if symmetric {
                let xw = geodesic::geodesic_point(kind, &c.points[w], &c.points[v], gamma)?;
                c.points[w] = xw;
            }
            c.points[v] = xv;
        }
    }
    Ok(())
}

fn sampled_step<R: Rng + ?Sized>(
    algo: Algorithm,
    c: &mut Configuration,
    g: &Graph,
    rng: &mut R,
    k: u64,
    symmetric: bool,
) -> Result<GossipEvent> {
    algo.check_supported(c.kind)?;
    let (v, w) = g.sample_pair(rng);
    let pre_distance = geodesic::distance(c.kind, &c.points[v], &c.points[w])?;
    apply_update(algo, c, v, w, k, symmetric)?;
    Ok(GossipEvent { iter: k, v, w, pre_distance })
}

/// One tick of random pairwise midpoint gossip.
pub fn gossip_step_midpoint<R: Rng + ?Sized>(
    c: &mut Configuration,
    g: &Graph,
    rng: &mut R,
    k: u64,
) -> Result<GossipEvent> {
    sampled_step(Algorithm::Midpoint, c, g, rng, k, false)
}

/// One tick of classical pairwise averaging.
pub fn gossip_step_arithmetic<R: Rng + ?Sized>(
    c: &mut Configuration,
    g: &Graph,
    rng: &mut R,
    k: u64,
) -> Result<GossipEvent> {
    sampled_step(Algorithm::Arithmetic, c, g, rng, k, false)
}

/// One tick of the stochastic-gradient baseline with step size `1/k`.
pub fn gossip_step_rsgd<R: Rng + ?Sized>(
    c: &mut Configuration,
    g: &Graph,
    rng: &mut R,
    k: u64,
    symmetric: bool,
) -> Result<GossipEvent> {
    sampled_step(Algorithm::Rsgd, c, g, rng, k, symmetric)
}

fn gaussian3<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)]
}

/// `sum_{k=1}^q z_k z_k^T` with standard Gaussian `z_k in R^3`; samples with
/// a tiny eigenvalue are redrawn.
pub fn sample_wishart<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<SpdMatrix> {
    if q != 3 {
        return Err(GossipError::domain(format!("Wishart samples are 3x3 with q = 3, got q = {q}")));
    }
    for _ in 0..tol::MAX_INIT_RETRIES {
        let mut m = Mat3::zeros();
        for _ in 0..q {
            let z = gaussian3(rng);
            m = m + Mat3::outer(&z, &z);
        }
        let m = m.symmetrize();
        if sym_eigen(&m)?.min_value() >= tol::WISHART_MIN_EIGENVALUE {
            return SpdMatrix::new(m);
        }
    }
    Err(GossipError::Initialization("Wishart sampling kept producing near-singular matrices".into()))
}

pub fn init_wishart<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> Result<Configuration> {
    let points = (0..n).map(|_| sample_wishart(q, rng).map(SpacePoint::Spd)).collect::<Result<_>>()?;
    Configuration::new(SpaceKind::Spd, points)
}

/// Uniform point of the open positive octant of the unit sphere.
pub fn sample_sphere_quarter<R: Rng + ?Sized>(rng: &mut R) -> SphereVec {
    loop {
        let z = gaussian3(rng).map(f64::abs);
        if z.iter().all(|&x| x > 0.0) {
            if let Ok(p) = SphereVec::normalized(z) {
                return p;
            }
        }
    }
}

pub fn init_sphere_quarter<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Configuration> {
    let points = (0..n).map(|_| SpacePoint::Sphere(sample_sphere_quarter(rng))).collect();
    Configuration::new(SpaceKind::Sphere, points)
}

/// Haar-uniform rotation of angle below `pi/4`: a uniform axis and an angle
/// with density proportional to `sin^2(theta/2)`, by rejection.
pub fn sample_so3_ball<R: Rng + ?Sized>(rng: &mut R) -> crate::spaces::Rotation {
    let axis = loop {
        let z = gaussian3(rng);
        let n = norm(&z);
        if n > 1e-8 {
            break scale(&z, 1.0 / n);
        }
    };
    let peak = (FRAC_PI_4 / 2.0).sin().powi(2);
    let theta = loop {
        let theta = FRAC_PI_4 * rng.random::<f64>();
        if rng.random::<f64>() * peak < (theta / 2.0).sin().powi(2) {
            break theta;
        }
    };
    so3_exp(&scale(&axis, theta))
}

pub fn init_so3_ball<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Configuration> {
    let points = (0..n).map(|_| SpacePoint::Rotation(sample_so3_ball(rng))).collect();
    Configuration::new(SpaceKind::So3, points)
}

/// A reduced word of uniform length in `1..=max_len`, each letter uniform
/// among those that do not cancel the previous one, and an offset uniform
/// in `(0, 1]`.
pub fn sample_tree_point<R: Rng + ?Sized>(max_len: usize, rng: &mut R) -> Result<TreePoint> {
    if max_len == 0 {
        return Err(GossipError::domain("tree words need max_len >= 1"));
    }
    let len = rng.random_range(1..=max_len);
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::from_index(rng.random_range(0..4u8));
        if letters.last().is_some_and(|&p| p.inverse() == l) {
            continue;
        }
        letters.push(l);
    }
    let lambda = 1.0 - rng.random::<f64>();
    TreePoint::new(Word::new(letters)?, lambda)
}

pub fn init_tree_words<R: Rng + ?Sized>(n: usize, max_len: usize, rng: &mut R) -> Result<Configuration> {
    let points = (0..n).map(|_| sample_tree_point(max_len, rng).map(SpacePoint::Tree)).collect::<Result<_>>()?;
    Configuration::new(SpaceKind::Tree, points)
}

pub fn init_euclidean<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<Configuration> {
    if dim == 0 {
        return Err(GossipError::domain("euclidean dimension must be at least 1"));
    }
    let points = (0..n)
        .map(|_| SpacePoint::Euclidean((0..dim).map(|_| rng.sample(StandardNormal)).collect()))
        .collect();
    Configuration::new(SpaceKind::Euclidean, points)
}

/// Space-specific sampler settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitParams {
    pub dim: usize,
    pub tree_max_len: usize,
    pub wishart_q: usize,
}

impl Default for InitParams {
    fn default() -> Self {
        InitParams { dim: 2, tree_max_len: 30, wishart_q: 3 }
    }
}

fn sample_configuration<R: Rng + ?Sized>(
    kind: SpaceKind,
    n: usize,
    params: &InitParams,
    rng: &mut R,
) -> Result<Configuration> {
    match kind {
        SpaceKind::Euclidean => init_euclidean(n, params.dim, rng),
        SpaceKind::Spd => init_wishart(n, params.wishart_q, rng),
        SpaceKind::Sphere => init_sphere_quarter(n, rng),
        SpaceKind::So3 => init_so3_ball(n, rng),
        SpaceKind::Tree => init_tree_words(n, params.tree_max_len, rng),
    }
}

/// One draw of the space's initial-state sampler.
pub fn sample_point<R: Rng + ?Sized>(kind: SpaceKind, params: &InitParams, rng: &mut R) -> Result<SpacePoint> {
    Ok(sample_configuration(kind, 1, params, rng)?.points.swap_remove(0))
}

/// Draws the initial configuration; for `kappa > 0` the draw is repeated
/// until its diameter is below `r_kappa`.
pub fn initial_configuration<R: Rng + ?Sized>(
    kind: SpaceKind,
    n: usize,
    params: &InitParams,
    kappa: f64,
    rng: &mut R,
) -> Result<Configuration> {
    let bound = CurvatureBound::new(kappa);
    if !bound.is_positive() {
        return sample_configuration(kind, n, params, rng);
    }
    for _ in 0..tol::MAX_INIT_RETRIES {
        let c = sample_configuration(kind, n, params, rng)?;
        // near-antipodal draws fail inside the distance itself
        match c.diameter() {
            Ok(d) if d < bound.r_kappa => return Ok(c),
            Ok(_) | Err(GossipError::Domain(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(GossipError::Initialization(format!(
        "no initial configuration with diameter below r_kappa = {} after {} draws",
        bound.r_kappa,
        tol::MAX_INIT_RETRIES
    )))
}

/// Seed of trial `index` in a batch started from `seed`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Everything that defines a trial apart from its index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSetup {
    pub kind: SpaceKind,
    pub algorithm: Algorithm,
    pub kappa: f64,
    pub seed: u64,
    pub init: InitParams,
    pub rsgd_symmetric: bool,
}

impl TrialSetup {
    pub fn new(kind: SpaceKind, algorithm: Algorithm, seed: u64) -> Self {
        TrialSetup {
            kind,
            algorithm,
            kappa: kind.default_kappa(),
            seed,
            init: InitParams::default(),
            rsgd_symmetric: false,
        }
    }
}

/// One seeded run: the configuration, its generator and a cache of all
/// pairwise distances that is refreshed only on the rows touched by each
/// update.
#[derive(Debug, Clone)]
pub struct Trial {
    setup: TrialSetup,
    graph: Graph,
    index: usize,
    config: Configuration,
    rng: ChaCha8Rng,
    distances: DistanceMatrix,
    iter: u64,
    bound: CurvatureBound,
}

impl Trial {
    pub fn new(setup: &TrialSetup, graph: &Graph, index: usize) -> Result<Self> {
        setup.algorithm.check_supported(setup.kind)?;
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(setup.seed, index));
        let config = initial_configuration(setup.kind, graph.n(), &setup.init, setup.kappa, &mut rng)?;
        Trial::from_configuration(setup, graph, index, config, rng)
    }

    /// Starts from a given configuration; pair sampling uses the trial seed.
    pub fn with_configuration(
        setup: &TrialSetup,
        graph: &Graph,
        index: usize,
        config: Configuration,
    ) -> Result<Self> {
        let rng = ChaCha8Rng::seed_from_u64(trial_seed(setup.seed, index));
        Trial::from_configuration(setup, graph, index, config, rng)
    }

    fn from_configuration(
        setup: &TrialSetup,
        graph: &Graph,
        index: usize,
        config: Configuration,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        setup.algorithm.check_supported(setup.kind)?;
        if config.kind() != setup.kind {
            return Err(GossipError::TagMismatch { expected: setup.kind, found: config.kind() });
        }
        if config.len() != graph.n() {
            return Err(GossipError::SizeMismatch(format!(
                "{} agents on a graph with {} vertices",
                config.len(),
                graph.n()
            )));
        }
        let distances = DistanceMatrix::compute(&config)?;
        Ok(Trial {
            setup: setup.clone(),
            graph: graph.clone(),
            index,
            config,
            rng,
            distances,
            iter: 0,
            bound: CurvatureBound::new(setup.kappa),
        })
    }

    pub fn configuration(&self) -> &Configuration {
        &self.config
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.distances
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Number of ticks executed so far.
    pub fn iteration(&self) -> u64 {
        self.iter
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn seed(&self) -> u64 {
        trial_seed(self.setup.seed, self.index)
    }

    pub fn metrics(&self) -> Result<MetricsRecord> {
        MetricsRecord::compute(&self.config, &self.distances, &self.graph, self.setup.kappa)
    }

    /// Executes one tick.
    pub fn step(&mut self) -> Result<GossipEvent> {
        let k = self.iter + 1;
        let (v, w) = self.graph.sample_pair(&mut self.rng);
        let pre_distance = self.distances.get(v, w);
        apply_update(self.setup.algorithm, &mut self.config, v, w, k, self.setup.rsgd_symmetric)?;
        self.distances.refresh_row(&self.config, v)?;
        if self.config.point(v) == self.config.point(w) {
            self.distances.copy_row(v, w);
        } else {
            self.distances.refresh_row(&self.config, w)?;
        }
        if self.bound.is_positive() {
            self.check_locality(v)?;
            self.check_locality(w)?;
        }
        self.iter = k;
        Ok(GossipEvent { iter: k, v, w, pre_distance })
    }

    fn check_locality(&self, v: usize) -> Result<()> {
        for u in 0..self.config.len() {
            let d = self.distances.get(v, u);
            if !(d < self.bound.r_kappa) {
                return Err(GossipError::domain(format!(
                    "locality violated: d(x_{v}, x_{u}) = {d} is not below r_kappa = {}",
                    self.bound.r_kappa
                )));
            }
        }
        Ok(())
    }

    fn located(&self, e: GossipError) -> GossipError {
        match e {
            GossipError::Trial { .. } => e,
            other => GossipError::Trial { trial: self.index, iter: self.iter, source: Box::new(other) },
        }
    }

    /// Runs `iters` ticks, recording metrics every `record_every` ticks
    /// (iteration 0 included).
    pub fn run(mut self, iters: u64, record_every: u64) -> Result<TrialSeries> {
        if record_every == 0 {
            return Err(GossipError::domain("record_every must be at least 1"));
        }
        let mut records = Vec::with_capacity((iters / record_every + 1) as usize);
        records.push(SeriesPoint { iter: 0, metrics: self.metrics().map_err(|e| self.located(e))? });
        while self.iter < iters {
            self.step().map_err(|e| GossipError::Trial {
                trial: self.index,
                iter: self.iter + 1,
                source: Box::new(e),
            })?;
            if self.iter % record_every == 0 {
                let metrics = self.metrics().map_err(|e| self.located(e))?;
                records.push(SeriesPoint { iter: self.iter, metrics });
            }
        }
        Ok(TrialSeries {
            trial: self.index,
            seed: self.seed(),
            algorithm: self.setup.algorithm,
            records,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub iter: u64,
    pub metrics: MetricsRecord,
}

/// Metrics of one trial at the recorded iterations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSeries {
    pub trial: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub records: Vec<SeriesPoint>,
}

impl TrialSeries {
    pub fn iters(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.iter as f64).collect()
    }

    pub fn values(&self, f: impl Fn(&MetricsRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(|r| f(&r.metrics)).collect()
    }
}

/// Builds and runs trial `index`.
pub fn run_trial(
    setup: &TrialSetup,
    graph: &Graph,
    index: usize,
    iters: u64,
    record_every: u64,
) -> Result<TrialSeries> {
    let trial = Trial::new(setup, graph, index).map_err(|e| match e {
        GossipError::Trial { .. } => e,
        other => GossipError::Trial { trial: index, iter: 0, source: Box::new(other) },
    })?;
    trial.run(iters, record_every)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::variance;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn euclid(xs: &[f64]) -> Configuration {
        Configuration::new(SpaceKind::Euclidean, xs.iter().map(|&x| SpacePoint::Euclidean(vec![x])).collect())
            .unwrap()
    }

    #[test]
    fn two_agents_meet_in_the_middle() {
        let mut c = euclid(&[0.0, 2.0]);
        let g = Graph::complete(2).unwrap();
        assert_eq!(variance(&c).unwrap(), 2.0);
        let e = gossip_step_midpoint(&mut c, &g, &mut rng(1), 1).unwrap();
        assert_eq!(e.pre_distance, 2.0);
        assert_eq!(c.points(), &[SpacePoint::Euclidean(vec![1.0]), SpacePoint::Euclidean(vec![1.0])]);
        assert_eq!(variance(&c).unwrap(), 0.0);
    }

    #[test]
    fn consensus_is_a_fixed_point() {
        let g = Graph::path(3).unwrap();
        let m = SpacePoint::Spd(SpdMatrix::from_diagonal([1.0, 2.0, 3.0]).unwrap());
        let c0 = Configuration::new(SpaceKind::Spd, vec![m.clone(), m.clone(), m]).unwrap();
        for algo in [Algorithm::Midpoint, Algorithm::Arithmetic, Algorithm::Rsgd] {
            let mut c = c0.clone();
            let mut r = rng(3);
            for k in 1..20 {
                sampled_step(algo, &mut c, &g, &mut r, k, false).unwrap();
            }
            assert_eq!(c, c0, "{algo}");
        }
    }

    #[test]
    fn arithmetic_matches_midpoint_in_euclidean_space() {
        let g = Graph::complete(5).unwrap();
        let mut a = init_euclidean(5, 3, &mut rng(9)).unwrap();
        let mut b = a.clone();
        let (mut ra, mut rb) = (rng(4), rng(4));
        for k in 1..50 {
            gossip_step_midpoint(&mut a, &g, &mut ra, k).unwrap();
            gossip_step_arithmetic(&mut b, &g, &mut rb, k).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn arithmetic_average_of_spd() {
        let mut c = Configuration::new(
            SpaceKind::Spd,
            vec![
                SpacePoint::Spd(SpdMatrix::identity()),
                SpacePoint::Spd(SpdMatrix::from_diagonal([3.0, 1.0, 1.0]).unwrap()),
            ],
        )
        .unwrap();
        apply_update(Algorithm::Arithmetic, &mut c, 0, 1, 1, false).unwrap();
        let expected = SpacePoint::Spd(SpdMatrix::from_diagonal([2.0, 1.0, 1.0]).unwrap());
        assert_eq!(c.point(0), &expected);
        assert_eq!(c.point(1), &expected);
    }

    #[test]
    fn unsupported_baselines() {
        let mut c = init_sphere_quarter(3, &mut rng(1)).unwrap();
        assert!(matches!(
            apply_update(Algorithm::Arithmetic, &mut c, 0, 1, 1, false),
            Err(GossipError::UnsupportedSpace { .. })
        ));
        let mut t = init_tree_words(3, 5, &mut rng(1)).unwrap();
        assert!(matches!(
            apply_update(Algorithm::Rsgd, &mut t, 0, 1, 1, false),
            Err(GossipError::UnsupportedSpace { .. })
        ));
    }

    #[test]
    fn rsgd_first_step_jumps_and_later_steps_shrink() {
        let mut c = init_wishart(2, 3, &mut rng(5)).unwrap();
        let w_before = c.point(1).clone();
        apply_update(Algorithm::Rsgd, &mut c, 0, 1, 1, false).unwrap();
        let d = geodesic::distance(SpaceKind::Spd, c.point(0), &w_before).unwrap();
        assert!(d < 1e-12);
        assert_eq!(c.point(1), &w_before);

        let mut c = init_wishart(2, 3, &mut rng(6)).unwrap();
        let before = c.point(0).clone();
        let full = geodesic::distance(SpaceKind::Spd, c.point(0), c.point(1)).unwrap();
        apply_update(Algorithm::Rsgd, &mut c, 0, 1, 40, false).unwrap();
        let moved = geodesic::distance(SpaceKind::Spd, &before, c.point(0)).unwrap();
        assert!((moved - full / 40.0).abs() < 1e-7);
    }

    #[test]
    fn wishart_mean_is_three_identity() {
        let mut r = rng(17);
        let draws = 10_000;
        let mut sum = Mat3::zeros();
        for _ in 0..draws {
            sum = sum + *sample_wishart(3, &mut r).unwrap().matrix();
        }
        let mean = sum.scale(1.0 / draws as f64);
        let diff = mean - Mat3::identity().scale(3.0);
        assert!(diff.entries().iter().all(|x| x.abs() < 0.1), "{mean:?}");
        assert!(sample_wishart(2, &mut r).is_err());
    }

    #[test]
    fn sphere_quarter_samples() {
        let mut r = rng(2);
        let c = init_sphere_quarter(30, &mut r).unwrap();
        for p in c.points() {
            let SpacePoint::Sphere(x) = p else { panic!() };
            assert!(x.coords().iter().all(|&v| v > 0.0));
        }
        assert!(c.diameter().unwrap() < std::f64::consts::FRAC_PI_2 - 1e-9);
        let mut mean = [0.0; 3];
        for _ in 0..10_000 {
            let p = sample_sphere_quarter(&mut r);
            for i in 0..3 {
                mean[i] += p.coords()[i];
            }
        }
        let n = norm(&mean);
        let target = 1.0 / 3f64.sqrt();
        assert!(mean.iter().all(|m| (m / n - target).abs() < 0.02), "{mean:?}");
    }

    #[test]
    fn so3_ball_samples() {
        let c = init_so3_ball(30, &mut rng(8)).unwrap();
        for p in c.points() {
            let SpacePoint::Rotation(r) = p else { panic!() };
            assert!(r.angle() < FRAC_PI_4);
        }
        assert!(c.diameter().unwrap() < std::f64::consts::FRAC_PI_2);
        assert_eq!(init_so3_ball(5, &mut rng(8)).unwrap(), init_so3_ball(5, &mut rng(8)).unwrap());
    }

    #[test]
    fn tree_word_lengths_are_uniform() {
        let mut r = rng(12);
        let mut counts = [0usize; 30];
        let draws = 100_000;
        for _ in 0..draws {
            let p = sample_tree_point(30, &mut r).unwrap();
            let letters = p.word().letters();
            assert!(letters.windows(2).all(|w| w[1] != w[0].inverse()));
            assert!(p.lambda() > 0.0 && p.lambda() <= 1.0);
            counts[letters.len() - 1] += 1;
        }
        let expected = draws as f64 / 30.0;
        let sd = (expected * (1.0 - 1.0 / 30.0)).sqrt();
        assert!(counts.iter().all(|&c| (c as f64 - expected).abs() < 5.0 * sd), "{counts:?}");
    }

    #[test]
    fn trials_are_deterministic_and_cache_stays_exact() {
        let g = Graph::complete(6).unwrap();
        for kind in SpaceKind::ALL {
            let setup = TrialSetup::new(kind, Algorithm::Midpoint, 42);
            let a = run_trial(&setup, &g, 1, 60, 1).unwrap();
            let b = run_trial(&setup, &g, 1, 60, 1).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.records.len(), 61);

            let mut t = Trial::new(&setup, &g, 3).unwrap();
            for _ in 0..40 {
                t.step().unwrap();
            }
            let fresh = DistanceMatrix::compute(t.configuration()).unwrap();
            assert_eq!(&fresh, t.distances(), "{kind}");
        }
    }

    #[test]
    fn zero_iterations_and_record_stride() {
        let g = Graph::path(4).unwrap();
        let setup = TrialSetup::new(SpaceKind::Tree, Algorithm::Midpoint, 0);
        assert_eq!(run_trial(&setup, &g, 0, 0, 1).unwrap().records.len(), 1);
        let s = run_trial(&setup, &g, 0, 25, 10).unwrap();
        assert_eq!(s.records.iter().map(|r| r.iter).collect::<Vec<_>>(), vec![0, 10, 20]);
    }

    #[test]
    fn impossible_locality_bound_fails_initialization() {
        let g = Graph::complete(30).unwrap();
        let mut setup = TrialSetup::new(SpaceKind::Sphere, Algorithm::Midpoint, 0);
        setup.kappa = 16.0;
        let err = run_trial(&setup, &g, 0, 10, 1).unwrap_err();
        let GossipError::Trial { source, .. } = err else { panic!("{err:?}") };
        assert!(matches!(*source, GossipError::Initialization(_)));
    }
}
