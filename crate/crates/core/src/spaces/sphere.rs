//! The unit sphere S^2 in R^3 with the great-circle distance.

use serde::{Deserialize, Serialize};

use super::linalg::{cross, dot, norm, Vec3};
use crate::error::{GossipError, Result};
use crate::geodesic::{check_fraction, GeodesicSpace, SpaceKind};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SphereVec(Vec3);

impl SphereVec {
    /// Accepts vectors of unit norm within 1e-12.
    pub fn new(v: Vec3) -> Result<Self> {
        let n = norm(&v);
        if !n.is_finite() || (n - 1.0).abs() > tol::INVARIANT {
            return Err(GossipError::InvalidPoint(format!("sphere point has norm {n}")));
        }
        Ok(SphereVec(v))
    }

    /// Projects a nonzero vector onto the sphere.
    pub fn normalized(v: Vec3) -> Result<Self> {
        let n = norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(GossipError::InvalidPoint("cannot normalize a zero vector".into()));
        }
        Ok(SphereVec([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }
}

impl TryFrom<[f64; 3]> for SphereVec {
    type Error = GossipError;
    fn try_from(v: [f64; 3]) -> Result<Self> {
        SphereVec::new(v)
    }
}

impl From<SphereVec> for [f64; 3] {
    fn from(p: SphereVec) -> Self {
        p.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sphere;

fn check_not_antipodal(c: f64) -> Result<()> {
    if c > -1.0 + tol::INVARIANT {
        Ok(())
    } else {
        Err(GossipError::domain(format!(
            "sphere points are (nearly) antipodal: <p, q> = {c}"
        )))
    }
}

impl GeodesicSpace for Sphere {
    type Point = SphereVec;

    const KIND: SpaceKind = SpaceKind::Sphere;

    fn distance(p: &SphereVec, q: &SphereVec) -> Result<f64> {
        let c = dot(&p.0, &q.0);
        check_not_antipodal(c)?;
        // atan2 keeps precision at both small and large angles
        Ok(norm(&cross(&p.0, &q.0)).atan2(c))
    }

    fn geodesic_point(p: &SphereVec, q: &SphereVec, t: f64) -> Result<SphereVec> {
        check_fraction(t)?;
        if t == 0.0 {
            return Ok(*p);
        }
        if t == 1.0 {
            return Ok(*q);
        }
        let theta = Self::distance(p, q)?;
        if theta < tol::COINCIDENT {
            return Ok(*p);
        }
        let c = dot(&p.0, &q.0);
        let u = [q.0[0] - c * p.0[0], q.0[1] - c * p.0[1], q.0[2] - c * p.0[2]];
        let un = norm(&u);
        let (s, co) = (t * theta).sin_cos();
        let g = [
            co * p.0[0] + s * u[0] / un,
            co * p.0[1] + s * u[1] / un,
            co * p.0[2] + s * u[2] / un,
        ];
        SphereVec::normalized(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unit_vectors() {
        assert!(SphereVec::new([1.0, 1.0, 0.0]).is_err());
        assert!(SphereVec::normalized([0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn antipodal_pairs_are_rejected() {
        let p = SphereVec::new([0.0, 0.0, 1.0]).unwrap();
        let q = SphereVec::new([0.0, 0.0, -1.0]).unwrap();
        assert!(matches!(Sphere::distance(&p, &q), Err(GossipError::Domain(_))));
        assert!(Sphere::midpoint(&p, &q).is_err());
    }

    #[test]
    fn small_angles_are_accurate() {
        let p = SphereVec::new([1.0, 0.0, 0.0]).unwrap();
        let eps: f64 = 1e-9;
        let q = SphereVec::new([eps.cos(), eps.sin(), 0.0]).unwrap();
        let d = Sphere::distance(&p, &q).unwrap();
        assert!(((d - eps) / eps).abs() < 1e-12);
    }

    #[test]
    fn geodesic_satisfies_distance_identity() {
        let p = SphereVec::normalized([1.0, 2.0, 0.5]).unwrap();
        let q = SphereVec::normalized([0.2, 0.1, 1.0]).unwrap();
        let d = Sphere::distance(&p, &q).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let g = Sphere::geodesic_point(&p, &q, t).unwrap();
            assert!((Sphere::distance(&p, &g).unwrap() - t * d).abs() < 1e-14);
            assert!((Sphere::distance(&g, &q).unwrap() - (1.0 - t) * d).abs() < 1e-14);
        }
    }
}
