//! Rotations of R^3 with the bi-invariant metric `d(R1, R2)^2 =
//! 1/2 ||log(R1^T R2)||_F^2`, i.e. the angle of the relative rotation.
//! With this normalization the sectional curvature is 1/4.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::linalg::{dot, norm, scale, Mat3, Vec3};
use crate::error::{GossipError, Result};
use crate::geodesic::{check_fraction, GeodesicSpace, SpaceKind};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat3", into = "Mat3")]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn new(m: Mat3) -> Result<Self> {
        if !m.is_finite() {
            return Err(GossipError::InvalidPoint("rotation has non-finite entries".into()));
        }
        let drift = orthogonality_defect(&m);
        if drift > tol::ROTATION_ORTHOGONALITY {
            return Err(GossipError::InvalidPoint(format!(
                "matrix is not orthogonal (||R^T R - I||_F = {drift:.3e})"
            )));
        }
        if !(m.det() > 0.0) {
            return Err(GossipError::InvalidPoint("rotation has negative determinant".into()));
        }
        Ok(Rotation(m))
    }

    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        rotation_angle(&self.0)
    }

    /// Group product `self * rhs`, re-orthonormalized if rounding drift
    /// exceeds 1e-12.
    pub fn compose(&self, rhs: &Rotation) -> Rotation {
        Rotation(reorthonormalize(self.0 * rhs.0))
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }
}

impl TryFrom<Mat3> for Rotation {
    type Error = GossipError;
    fn try_from(m: Mat3) -> Result<Self> {
        Rotation::new(m)
    }
}

impl From<Rotation> for Mat3 {
    fn from(r: Rotation) -> Mat3 {
        r.0
    }
}

fn orthogonality_defect(m: &Mat3) -> f64 {
    (m.tr_mul(m) - Mat3::identity()).frobenius_norm()
}

/// One polar-decomposition Newton step `R <- (R + R^{-T}) / 2` when needed.
fn reorthonormalize(m: Mat3) -> Mat3 {
    if orthogonality_defect(&m) <= tol::ROTATION_DRIFT {
        return m;
    }
    let det = m.det();
    let inv_t = m.cofactor().scale(1.0 / det);
    (m + inv_t).scale(0.5)
}

/// `sin(theta) * axis`, read off the skew part of `R`.
fn skew_vector(m: &Mat3) -> Vec3 {
    let r = &m.0;
    [
        0.5 * (r[2][1] - r[1][2]),
        0.5 * (r[0][2] - r[2][0]),
        0.5 * (r[1][0] - r[0][1]),
    ]
}

fn rotation_angle(m: &Mat3) -> f64 {
    let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let s = norm(&skew_vector(m));
    s.atan2(c)
}

/// Rodrigues formula `exp([v]_x) = I + A [v]_x + B [v]_x^2`.
pub fn so3_exp(v: &Vec3) -> Rotation {
    let theta2 = dot(v, v);
    let theta = theta2.sqrt();
    let (a, b) = if theta < tol::SO3_SMALL_ANGLE {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        let (s, c) = theta.sin_cos();
        (s / theta, (1.0 - c) / theta2)
    };
    let k = Mat3::hat(v);
    let k2 = k * k;
    Rotation(reorthonormalize(Mat3::identity() + k.scale(a) + k2.scale(b)))
}

/// Principal logarithm as an axis-angle vector with norm in `[0, pi)`.
pub fn so3_log(r: &Rotation) -> Result<Vec3> {
    log_matrix(&r.0)
}

fn log_matrix(m: &Mat3) -> Result<Vec3> {
    let w = skew_vector(m);
    let s = norm(&w);
    let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = s.atan2(c);
    if theta >= PI - tol::DOMAIN_GUARD {
        return Err(GossipError::domain(format!(
            "rotation angle {theta} is too close to pi; principal logarithm undefined"
        )));
    }
    if theta < tol::SO3_SMALL_ANGLE {
        let t2 = theta * theta;
        return Ok(scale(&w, 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0));
    }
    if theta <= FRAC_PI_2 {
        return Ok(scale(&w, theta / s));
    }
    // Near pi the skew part vanishes; recover the axis from the symmetric
    // part (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) a a^T.
    let r = &m.0;
    let one_minus_c = 1.0 - c;
    let b = |i: usize, j: usize| 0.5 * (r[i][j] + r[j][i]) - if i == j { c } else { 0.0 };
    let i = (0..3)
        .max_by(|&x, &y| b(x, x).total_cmp(&b(y, y)))
        .expect("three candidates");
    let ai = (b(i, i) / one_minus_c).max(0.0).sqrt();
    let mut axis = [0.0; 3];
    for (j, a) in axis.iter_mut().enumerate() {
        *a = if j == i { ai } else { b(j, i) / (one_minus_c * ai) };
    }
    let n = norm(&axis);
    let mut axis = scale(&axis, 1.0 / n);
    if dot(&axis, &w) < 0.0 {
        axis = scale(&axis, -1.0);
    }
    Ok(scale(&axis, theta))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct So3;

impl GeodesicSpace for So3 {
    type Point = Rotation;

    const KIND: SpaceKind = SpaceKind::So3;

    fn distance(p: &Rotation, q: &Rotation) -> Result<f64> {
        // p^T q and q^T p are exact transposes of each other, so the angle
        // is computed identically in both orders.
        let theta = rotation_angle(&p.0.tr_mul(&q.0));
        if theta >= PI - tol::DOMAIN_GUARD {
            return Err(GossipError::domain(format!(
                "rotations are (nearly) antipodal: relative angle {theta}"
            )));
        }
        Ok(theta)
    }

    fn geodesic_point(p: &Rotation, q: &Rotation, t: f64) -> Result<Rotation> {
        check_fraction(t)?;
        if t == 0.0 {
            return Ok(*p);
        }
        if t == 1.0 {
            return Ok(*q);
        }
        let v = log_matrix(&p.0.tr_mul(&q.0))?;
        if norm(&v) < tol::COINCIDENT {
            return Ok(*p);
        }
        let step = so3_exp(&scale(&v, t));
        Ok(p.compose(&step))
    }
}
