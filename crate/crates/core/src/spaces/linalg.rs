//! Fixed-size 3x3 kernels: products, Cholesky, and a cyclic Jacobi
//! eigensolver for symmetric matrices.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{GossipError, Result};

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const fn zeros() -> Self {
        Mat3([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn from_diagonal(d: Vec3) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    /// `u v^T`
    pub fn outer(u: &Vec3, v: &Vec3) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = u[i] * v[j];
            }
        }
        m
    }

    /// Skew-symmetric matrix `[v]_x` such that `[v]_x w = v x w`.
    pub fn hat(v: &Vec3) -> Self {
        Mat3([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    /// `self^T * rhs` without forming the transpose.
    pub fn tr_mul(&self, rhs: &Mat3) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[0][i] * rhs.0[0][j]
                    + self.0[1][i] * rhs.0[1][j]
                    + self.0[2][i] * rhs.0[2][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Cofactor matrix, so that `inverse = cofactor^T / det`.
    pub fn cofactor(&self) -> Self {
        let m = &self.0;
        Mat3([
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
            ],
            [
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
            ],
            [
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ])
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(self.cofactor().transpose().scale(1.0 / det))
    }

    /// Frobenius inner product `sum_ij a_ij b_ij`, evaluated in a fixed order.
    pub fn frobenius_dot(&self, rhs: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.0[i][j] * rhs.0[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_dot(self).sqrt()
    }

    pub fn symmetrize(&self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let avg = 0.5 * (self.0[i][j] + self.0[j][i]);
                out.0[i][j] = avg;
                out.0[j][i] = avg;
            }
        }
        out
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.0;
        (m[0][1] - m[1][0])
            .abs()
            .max((m[0][2] - m[2][0]).abs())
            .max((m[1][2] - m[2][1]).abs())
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Row-major entries.
    pub fn entries(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    /// Total order on entries, used to canonicalize argument order.
    pub fn total_cmp(&self, rhs: &Mat3) -> std::cmp::Ordering {
        for (a, b) in self.entries().iter().zip(rhs.entries().iter()) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        &self * &rhs
    }
}

impl Mul for &Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: &Mat3) -> Mat3 {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i][0] * rhs.0[0][j]
                    + self.0[i][1] * rhs.0[1][j]
                    + self.0[i][2] * rhs.0[2][j];
            }
        }
        out
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(mut self, rhs: Mat3) -> Mat3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(mut self, rhs: Mat3) -> Mat3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Eigendecomposition `A = V diag(values) V^T` of a symmetric matrix.
/// Columns of `vectors` are the eigenvectors.
#[derive(Debug, Clone, Copy)]
pub struct SymEigen {
    pub values: Vec3,
    pub vectors: Mat3,
}

impl SymEigen {
    /// `V diag(f(values)) V^T`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Mat3 {
        let v = &self.vectors.0;
        let fv = [f(self.values[0]), f(self.values[1]), f(self.values[2])];
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let s = v[i][0] * fv[0] * v[j][0] + v[i][1] * fv[1] * v[j][1] + v[i][2] * fv[2] * v[j][2];
                out.0[i][j] = s;
                out.0[j][i] = s;
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values[0].min(self.values[1]).min(self.values[2])
    }
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigensolver; iterates until every off-diagonal entry is
/// negligible against the diagonal at machine precision.
pub fn sym_eigen(a: &Mat3) -> Result<SymEigen> {
    if !a.is_finite() {
        return Err(GossipError::numerical("non-finite matrix passed to eigensolver"));
    }
    let mut m = a.symmetrize().0;
    let mut v = Mat3::identity().0;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = m[0][1].abs() + m[0][2].abs() + m[1][2].abs();
        if off == 0.0 {
            return Ok(SymEigen { values: [m[0][0], m[1][1], m[2][2]], vectors: Mat3(v) });
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = m[p][q];
            if apq == 0.0 {
                continue;
            }
            let app = m[p][p];
            let aqq = m[q][q];
            if apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                continue;
            }
            let theta = (aqq - app) / (2.0 * apq);
            let t = if theta.abs() > 1e150 {
                0.5 / theta
            } else {
                theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
            };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            for row in m.iter_mut() {
                let akp = row[p];
                let akq = row[q];
                row[p] = c * akp - s * akq;
                row[q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = m[p][k];
                let aqk = m[q][k];
                m[p][k] = c * apk - s * aqk;
                m[q][k] = s * apk + c * aqk;
            }
            m[p][q] = 0.0;
            m[q][p] = 0.0;
            for row in v.iter_mut() {
                let vkp = row[p];
                let vkq = row[q];
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    Err(GossipError::numerical("Jacobi eigensolver did not converge"))
}

/// Lower-triangular Cholesky factor `L` with `A = L L^T`.
pub fn cholesky(a: &Mat3) -> Result<Mat3> {
    let a = &a.0;
    let mut l = Mat3::zeros().0;
    for j in 0..3 {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 0.0) {
            return Err(GossipError::numerical("matrix is not positive definite (Cholesky pivot <= 0)"));
        }
        let ljj = d.sqrt();
        l[j][j] = ljj;
        for i in (j + 1)..3 {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / ljj;
        }
    }
    Ok(Mat3(l))
}

/// `L^{-1} X L^{-T}` for lower-triangular `L` and symmetric `X`.
pub fn whiten(l: &Mat3, x: &Mat3) -> Mat3 {
    let y = lower_solve(l, x);
    lower_solve(l, &y.transpose()).symmetrize()
}

/// Solves `L Y = X` column by column.
fn lower_solve(l: &Mat3, x: &Mat3) -> Mat3 {
    let l = &l.0;
    let mut y = Mat3::zeros().0;
    for col in 0..3 {
        for i in 0..3 {
            let mut s = x.0[i][col];
            for k in 0..i {
                s -= l[i][k] * y[k][col];
            }
            y[i][col] = s / l[i][i];
        }
    }
    Mat3(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymEigen) -> Mat3 {
        e.map(|x| x)
    }

    #[test]
    fn jacobi_diagonal_is_exact() {
        let d = Mat3::from_diagonal([3.0, 1.0, 2.0]);
        let e = sym_eigen(&d).unwrap();
        let mut vals = e.values;
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn jacobi_reconstructs_dense_symmetric() {
        let a = Mat3([[4.0, 1.0, -2.0], [1.0, 2.0, 0.5], [-2.0, 0.5, 3.0]]);
        let e = sym_eigen(&a).unwrap();
        let r = reconstruct(&e);
        assert!((r - a).frobenius_norm() < 1e-13);
        let vtv = e.vectors.tr_mul(&e.vectors);
        assert!((vtv - Mat3::identity()).frobenius_norm() < 1e-14);
        // trace and determinant are spectral invariants
        let sum: f64 = e.values.iter().sum();
        assert!((sum - a.trace()).abs() < 1e-13);
        let prod: f64 = e.values.iter().product();
        assert!((prod - a.det()).abs() < 1e-12);
    }

    #[test]
    fn jacobi_handles_repeated_eigenvalues() {
        let a = Mat3([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]);
        let mut vals = sym_eigen(&a).unwrap().values;
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        assert!((vals[2] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_rejects_nan() {
        let mut a = Mat3::identity();
        a.0[1][2] = f64::NAN;
        assert!(sym_eigen(&a).is_err());
    }

    #[test]
    fn cholesky_and_whiten() {
        let a = Mat3([[4.0, 2.0, 0.4], [2.0, 3.0, 0.1], [0.4, 0.1, 1.5]]);
        let l = cholesky(&a).unwrap();
        let llt = &l * &l.transpose();
        assert!((llt - a).frobenius_norm() < 1e-14);
        let w = whiten(&l, &a);
        assert!((w - Mat3::identity()).frobenius_norm() < 1e-14);
        assert!(cholesky(&Mat3::from_diagonal([1.0, -1.0, 1.0])).is_err());
    }

    #[test]
    fn inverse_and_cofactor() {
        let a = Mat3([[2.0, 0.0, 1.0], [1.0, 3.0, 0.0], [0.0, 1.0, 4.0]]);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv - Mat3::identity()).frobenius_norm() < 1e-14);
        assert!(Mat3::zeros().inverse().is_none());
    }

    #[test]
    fn hat_matches_cross_product() {
        let v = [0.3, -1.2, 2.0];
        let w = [1.0, 0.5, -0.25];
        let a = Mat3::hat(&v).mul_vec(&w);
        let b = cross(&v, &w);
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-15);
        }
    }
}
