//! 3x3 symmetric positive-definite matrices with the affine-invariant
//! metric `d(M, N) = ||log(N^{-1/2} M N^{-1/2})||_F`.
//!
//! Both the distance and the geodesic are evaluated on the whitened
//! difference `E = L^{-1} (M - N) L^{-T}` (with `L` a square root of the base
//! point), so that `log(I + E)` goes through `ln_1p` and nearby matrices keep
//! full relative precision in their distance.

use serde::{Deserialize, Serialize};

use super::linalg::{cholesky, sym_eigen, whiten, Mat3};
use crate::error::{GossipError, Result};
use crate::geodesic::{check_fraction, GeodesicSpace, SpaceKind};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat3", into = "Mat3")]
pub struct SpdMatrix(Mat3);

impl SpdMatrix {
    /// Validates symmetry (to 1e-12) and positivity (eigenvalues > 1e-12);
    /// the stored matrix is exactly symmetric.
    pub fn new(m: Mat3) -> Result<Self> {
        if !m.is_finite() {
            return Err(GossipError::InvalidPoint("SPD matrix has non-finite entries".into()));
        }
        if m.asymmetry() > tol::INVARIANT {
            return Err(GossipError::InvalidPoint(format!(
                "matrix is not symmetric (asymmetry {:.3e})",
                m.asymmetry()
            )));
        }
        let m = m.symmetrize();
        let min = sym_eigen(&m)?.min_value();
        if !(min > tol::INVARIANT) {
            return Err(GossipError::InvalidPoint(format!(
                "matrix is not positive definite (smallest eigenvalue {min:.3e})"
            )));
        }
        Ok(SpdMatrix(m))
    }

    pub fn identity() -> Self {
        SpdMatrix(Mat3::identity())
    }

    pub fn from_diagonal(d: [f64; 3]) -> Result<Self> {
        Self::new(Mat3::from_diagonal(d))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Entrywise average; SPD is closed under convex combinations.
    pub fn average(&self, other: &SpdMatrix) -> SpdMatrix {
        SpdMatrix((self.0 + other.0).scale(0.5).symmetrize())
    }

    /// `A^T M A`, the congruence action of an invertible matrix.
    pub fn congruence(&self, a: &Mat3) -> Result<SpdMatrix> {
        SpdMatrix::new((a.transpose() * self.0 * *a).symmetrize())
    }

    /// Frobenius distance `||M - N||_F` in the ambient space of symmetric
    /// matrices.
    pub fn frobenius_distance(&self, other: &SpdMatrix) -> f64 {
        (self.0 - other.0).frobenius_norm()
    }

}

impl TryFrom<Mat3> for SpdMatrix {
    type Error = GossipError;
    fn try_from(m: Mat3) -> Result<Self> {
        SpdMatrix::new(m)
    }
}

impl From<SpdMatrix> for Mat3 {
    fn from(m: SpdMatrix) -> Mat3 {
        m.0
    }
}

/// The SPD cone as a Hadamard manifold.
#[derive(Debug, Clone, Copy, Default)]
pub struct Spd;

fn log_eigen_norm(mu: &[f64; 3]) -> Result<f64> {
    let mut s = 0.0;
    for &m in mu {
        if !(1.0 + m > tol::INVARIANT) {
            return Err(GossipError::numerical(format!(
                "relative eigenvalue {:.3e} is not positive",
                1.0 + m
            )));
        }
        let l = m.ln_1p();
        s += l * l;
    }
    Ok(s.sqrt())
}

impl GeodesicSpace for Spd {
    type Point = SpdMatrix;

    const KIND: SpaceKind = SpaceKind::Spd;

    fn distance(p: &SpdMatrix, q: &SpdMatrix) -> Result<f64> {
        // Fixed argument order makes the computed value exactly symmetric.
        let (m, n) = match p.0.total_cmp(&q.0) {
            std::cmp::Ordering::Equal => return Ok(0.0),
            std::cmp::Ordering::Less => (p, q),
            std::cmp::Ordering::Greater => (q, p),
        };
        let l = cholesky(&n.0)?;
        let e = whiten(&l, &(m.0 - n.0));
        let eig = sym_eigen(&e)?;
        log_eigen_norm(&eig.values)
    }

    fn geodesic_point(p: &SpdMatrix, q: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
        check_fraction(t)?;
        if t == 0.0 {
            return Ok(*p);
        }
        if t == 1.0 {
            return Ok(*q);
        }
        let base = sym_eigen(&p.0)?;
        if !(base.min_value() > tol::INVARIANT) {
            return Err(GossipError::numerical("base point lost positive definiteness"));
        }
        let sqrt = base.map(f64::sqrt);
        let inv_sqrt = base.map(|x| 1.0 / x.sqrt());
        let e = (inv_sqrt * (q.0 - p.0) * inv_sqrt).symmetrize();
        let eig = sym_eigen(&e)?;
        if log_eigen_norm(&eig.values)? < tol::COINCIDENT {
            return Ok(*p);
        }
        // p^{1/2} (p^{-1/2} q p^{-1/2})^t p^{1/2} = p + p^{1/2} ((I + E)^t - I) p^{1/2}
        let f = eig.map(|m| (t * m.ln_1p()).exp_m1());
        let out = (p.0 + sqrt * f * sqrt).symmetrize();
        Ok(SpdMatrix(out))
    }
}
