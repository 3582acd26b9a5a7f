//! The contract every state space satisfies: a distance, the unique
//! geodesic between two points, and its midpoint. Points are tagged values;
//! the space tag is passed explicitly and checked at dispatch.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GossipError, Result};
use crate::spaces::{
    Euclidean, Rotation, So3, Sphere, SphereVec, Spd, SpdMatrix, Tree, TreePoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Euclidean,
    Spd,
    Sphere,
    So3,
    Tree,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 5] =
        [SpaceKind::Euclidean, SpaceKind::Spd, SpaceKind::Sphere, SpaceKind::So3, SpaceKind::Tree];

    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceKind::Euclidean => "euclidean",
            SpaceKind::Spd => "spd",
            SpaceKind::Sphere => "sphere",
            SpaceKind::So3 => "so3",
            SpaceKind::Tree => "tree",
        }
    }

    /// Upper curvature bound of the space as used by the experiments.
    pub fn default_kappa(&self) -> f64 {
        match self {
            SpaceKind::Sphere => 1.0,
            SpaceKind::So3 => 0.25,
            SpaceKind::Euclidean | SpaceKind::Spd | SpaceKind::Tree => 0.0,
        }
    }

    pub fn is_cat0(&self) -> bool {
        self.default_kappa() <= 0.0
    }

    /// Whether the space sits in a linear ambient where entrywise averages
    /// stay in the space.
    pub fn is_linear(&self) -> bool {
        matches!(self, SpaceKind::Euclidean | SpaceKind::Spd)
    }

    /// Tolerance for `d(p, gamma(t)) = t d(p, q)` in this space.
    pub fn identity_tolerance(&self) -> f64 {
        match self {
            SpaceKind::Spd | SpaceKind::So3 => crate::tol::GEODESIC_MATRIX,
            _ => crate::tol::GEODESIC,
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpaceKind {
    type Err = GossipError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "r" | "rn" => Ok(SpaceKind::Euclidean),
            "spd" => Ok(SpaceKind::Spd),
            "sphere" | "s2" => Ok(SpaceKind::Sphere),
            "so3" | "so(3)" => Ok(SpaceKind::So3),
            "tree" | "f2" => Ok(SpaceKind::Tree),
            other => Err(GossipError::Parse(format!("unknown space `{other}`"))),
        }
    }
}

/// One agent's state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpacePoint {
    Euclidean(Vec<f64>),
    Spd(SpdMatrix),
    Sphere(SphereVec),
    Rotation(Rotation),
    Tree(TreePoint),
}

impl SpacePoint {
    pub fn kind(&self) -> SpaceKind {
        match self {
            SpacePoint::Euclidean(_) => SpaceKind::Euclidean,
            SpacePoint::Spd(_) => SpaceKind::Spd,
            SpacePoint::Sphere(_) => SpaceKind::Sphere,
            SpacePoint::Rotation(_) => SpaceKind::So3,
            SpacePoint::Tree(_) => SpaceKind::Tree,
        }
    }
}

impl From<SpdMatrix> for SpacePoint {
    fn from(m: SpdMatrix) -> Self {
        SpacePoint::Spd(m)
    }
}

impl From<SphereVec> for SpacePoint {
    fn from(p: SphereVec) -> Self {
        SpacePoint::Sphere(p)
    }
}

impl From<Rotation> for SpacePoint {
    fn from(r: Rotation) -> Self {
        SpacePoint::Rotation(r)
    }
}

impl From<TreePoint> for SpacePoint {
    fn from(p: TreePoint) -> Self {
        SpacePoint::Tree(p)
    }
}

impl From<Vec<f64>> for SpacePoint {
    fn from(v: Vec<f64>) -> Self {
        SpacePoint::Euclidean(v)
    }
}

/// Curvature metadata `(kappa, D_kappa, r_kappa)` of the model space used
/// for comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBound {
    pub kappa: f64,
    /// Diameter of the model space; `+inf` when `kappa <= 0`.
    pub d_kappa: f64,
    /// Half the model diameter; the radius below which balls are convex.
    pub r_kappa: f64,
}

impl CurvatureBound {
    pub fn new(kappa: f64) -> Self {
        let d_kappa = if kappa > 0.0 { PI / kappa.sqrt() } else { f64::INFINITY };
        CurvatureBound { kappa, d_kappa, r_kappa: d_kappa / 2.0 }
    }

    pub fn is_positive(&self) -> bool {
        self.kappa > 0.0
    }
}

/// A geodesic metric space with unique geodesics on its working domain.
pub trait GeodesicSpace {
    type Point: Clone;

    const KIND: SpaceKind;

    fn distance(p: &Self::Point, q: &Self::Point) -> Result<f64>;

    /// Point at fraction `t` of the way from `p` to `q` along the geodesic.
    fn geodesic_point(p: &Self::Point, q: &Self::Point, t: f64) -> Result<Self::Point>;

    fn midpoint(p: &Self::Point, q: &Self::Point) -> Result<Self::Point> {
        Self::geodesic_point(p, q, 0.5)
    }
}

pub(crate) fn check_fraction(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(GossipError::domain(format!("geodesic parameter t = {t} outside [0, 1]")))
    }
}

fn expect(kind: SpaceKind, p: &SpacePoint) -> Result<()> {
    if p.kind() == kind {
        Ok(())
    } else {
        Err(GossipError::TagMismatch { expected: kind, found: p.kind() })
    }
}

pub fn distance(kind: SpaceKind, p: &SpacePoint, q: &SpacePoint) -> Result<f64> {
    expect(kind, p)?;
    expect(kind, q)?;
    match (p, q) {
        (SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => Euclidean::distance(a, b),
        (SpacePoint::Spd(a), SpacePoint::Spd(b)) => Spd::distance(a, b),
        (SpacePoint::Sphere(a), SpacePoint::Sphere(b)) => Sphere::distance(a, b),
        (SpacePoint::Rotation(a), SpacePoint::Rotation(b)) => So3::distance(a, b),
        (SpacePoint::Tree(a), SpacePoint::Tree(b)) => Tree::distance(a, b),
        _ => unreachable!("tags checked above"),
    }
}

pub fn geodesic_point(kind: SpaceKind, p: &SpacePoint, q: &SpacePoint, t: f64) -> Result<SpacePoint> {
    check_fraction(t)?;
    expect(kind, p)?;
    expect(kind, q)?;
    Ok(match (p, q) {
        (SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) => {
            SpacePoint::Euclidean(Euclidean::geodesic_point(a, b, t)?)
        }
        (SpacePoint::Spd(a), SpacePoint::Spd(b)) => SpacePoint::Spd(Spd::geodesic_point(a, b, t)?),
        (SpacePoint::Sphere(a), SpacePoint::Sphere(b)) => {
            SpacePoint::Sphere(Sphere::geodesic_point(a, b, t)?)
        }
        (SpacePoint::Rotation(a), SpacePoint::Rotation(b)) => {
            SpacePoint::Rotation(So3::geodesic_point(a, b, t)?)
        }
        (SpacePoint::Tree(a), SpacePoint::Tree(b)) => SpacePoint::Tree(Tree::geodesic_point(a, b, t)?),
        _ => unreachable!("tags checked above"),
    })
}

pub fn midpoint(kind: SpaceKind, p: &SpacePoint, q: &SpacePoint) -> Result<SpacePoint> {
    geodesic_point(kind, p, q, 0.5)
}
