//! Constant-curvature model planes and the comparison inequalities that
//! characterize CAT(k) spaces.
//!
//! The model plane of curvature `k` is the Euclidean plane (`k = 0`), the
//! unit sphere rescaled by `1/sqrt(k)` (`k > 0`) or the hyperboloid rescaled
//! by `1/sqrt(-k)` (`k < 0`). Points are stored in the unscaled model; the
//! scaling only enters distances.

use crate::error::{GossipError, Result};
use crate::geodesic::{self, CurvatureBound, SpaceKind, SpacePoint};
use crate::spaces::linalg::{cross, dot, norm, Vec3};

/// `C_k(t)`: `cos(sqrt(k) t)`, `1`, or `cosh(sqrt(-k) t)`.
pub fn c_kappa(kappa: f64, t: f64) -> Result<f64> {
    check_length(t)?;
    Ok(if kappa > 0.0 {
        (kappa.sqrt() * t).cos()
    } else if kappa < 0.0 {
        ((-kappa).sqrt() * t).cosh()
    } else {
        1.0
    })
}

/// `S_k(t)`: `sin(sqrt(k) t)/sqrt(k)`, `t`, or `sinh(sqrt(-k) t)/sqrt(-k)`.
pub fn s_kappa(kappa: f64, t: f64) -> Result<f64> {
    check_length(t)?;
    Ok(if kappa > 0.0 {
        let r = kappa.sqrt();
        (r * t).sin() / r
    } else if kappa < 0.0 {
        let r = (-kappa).sqrt();
        (r * t).sinh() / r
    } else {
        t
    })
}

/// `chi_k(t) = 1 - cos(sqrt(k) t)`, evaluated as `2 sin^2(sqrt(k) t / 2)` so
/// small distances keep their relative precision. Only defined for `k > 0`.
pub fn chi_kappa(kappa: f64, t: f64) -> Result<f64> {
    check_length(t)?;
    if !(kappa > 0.0) {
        return Err(GossipError::domain(format!("chi_kappa needs kappa > 0, got {kappa}")));
    }
    Ok(chi_unchecked(kappa, t))
}

pub(crate) fn chi_unchecked(kappa: f64, t: f64) -> f64 {
    let s = (0.5 * kappa.sqrt() * t).sin();
    2.0 * s * s
}

fn check_length(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(GossipError::domain(format!("negative length {t}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelCoords {
    Plane([f64; 2]),
    /// Unit vector of the unscaled sphere.
    Sphere(Vec3),
    /// Upper sheet of `-x0^2 + x1^2 + x2^2 = -1`.
    Hyperbolic(Vec3),
}

/// A point of the model plane of curvature `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint2 {
    pub kappa: f64,
    pub coords: ModelCoords,
}

fn minkowski(x: &Vec3, y: &Vec3) -> f64 {
    -x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

impl ModelPoint2 {
    pub fn new(kappa: f64, coords: ModelCoords) -> Result<Self> {
        match (kappa.partial_cmp(&0.0), &coords) {
            (Some(std::cmp::Ordering::Equal), ModelCoords::Plane(_)) => {}
            (Some(std::cmp::Ordering::Greater), ModelCoords::Sphere(x)) => {
                if (norm(x) - 1.0).abs() > crate::tol::INVARIANT {
                    return Err(GossipError::InvalidPoint(format!(
                        "sphere model point has norm {}",
                        norm(x)
                    )));
                }
            }
            (Some(std::cmp::Ordering::Less), ModelCoords::Hyperbolic(x)) => {
                let q = minkowski(x, x);
                if (q + 1.0).abs() > 1e-10 || !(x[0] > 0.0) {
                    return Err(GossipError::InvalidPoint(format!(
                        "point is not on the upper hyperboloid (<x,x> = {q}, x0 = {})",
                        x[0]
                    )));
                }
            }
            _ => {
                return Err(GossipError::InvalidPoint(format!(
                    "coordinates do not match curvature {kappa}"
                )))
            }
        }
        Ok(ModelPoint2 { kappa, coords })
    }

    /// The base point every comparison triangle is anchored at.
    pub fn origin(kappa: f64) -> Self {
        model_point_polar(kappa, 0.0, 0.0)
    }
}

/// The point at distance `r` from the origin in direction `angle`.
pub fn model_point_polar(kappa: f64, r: f64, angle: f64) -> ModelPoint2 {
    let (s, c) = angle.sin_cos();
    let coords = if kappa > 0.0 {
        let (sr, cr) = (kappa.sqrt() * r).sin_cos();
        ModelCoords::Sphere([cr, sr * c, sr * s])
    } else if kappa < 0.0 {
        let u = (-kappa).sqrt() * r;
        ModelCoords::Hyperbolic([u.cosh(), u.sinh() * c, u.sinh() * s])
    } else {
        ModelCoords::Plane([r * c, r * s])
    };
    ModelPoint2 { kappa, coords }
}

pub fn model_distance(p: &ModelPoint2, q: &ModelPoint2) -> Result<f64> {
    if p.kappa != q.kappa {
        return Err(GossipError::KappaMismatch { expected: p.kappa, found: q.kappa });
    }
    match (&p.coords, &q.coords) {
        (ModelCoords::Plane(x), ModelCoords::Plane(y)) => Ok((x[0] - y[0]).hypot(x[1] - y[1])),
        (ModelCoords::Sphere(x), ModelCoords::Sphere(y)) => {
            Ok(norm(&cross(x, y)).atan2(dot(x, y)) / p.kappa.sqrt())
        }
        (ModelCoords::Hyperbolic(x), ModelCoords::Hyperbolic(y)) => {
            // |x - y|_L^2 = 2 cosh(d) - 2 = 4 sinh^2(d / 2)
            let diff = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
            let q = minkowski(&diff, &diff).max(0.0);
            Ok(2.0 * (0.5 * q.sqrt()).asinh() / (-p.kappa).sqrt())
        }
        _ => Err(GossipError::InvalidPoint("model point coordinates do not match kappa".into())),
    }
}

/// Side lengths of a triangle `PQR`: `a = d(Q, R)`, `b = d(P, R)`,
/// `c = d(P, Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleSides {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TriangleSides {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        TriangleSides { a, b, c }
    }

    pub fn perimeter(&self) -> f64 {
        self.a + self.b + self.c
    }

    fn check(&self, kappa: f64) -> Result<()> {
        let TriangleSides { a, b, c } = *self;
        let slack = 1e-12 * (1.0 + a.max(b).max(c));
        if !(a >= 0.0 && b >= 0.0 && c >= 0.0) || !self.perimeter().is_finite() {
            return Err(GossipError::InfeasibleTriangle(format!("bad side lengths {a}, {b}, {c}")));
        }
        if a > b + c + slack || b > a + c + slack || c > a + b + slack {
            return Err(GossipError::InfeasibleTriangle(format!(
                "sides {a}, {b}, {c} violate the triangle inequality"
            )));
        }
        let bound = CurvatureBound::new(kappa);
        if bound.is_positive() {
            if !(self.perimeter() < 2.0 * bound.d_kappa) {
                return Err(GossipError::InfeasibleTriangle(format!(
                    "perimeter {} is not below 2 D_kappa = {}",
                    self.perimeter(),
                    2.0 * bound.d_kappa
                )));
            }
            if a.max(b).max(c) > bound.d_kappa {
                return Err(GossipError::InfeasibleTriangle(format!(
                    "a side exceeds the model diameter {}",
                    bound.d_kappa
                )));
            }
        }
        Ok(())
    }
}

/// Angle at `P` opposite side `a`, by the half-angle formula of the model
/// plane (numerically stable for thin and near-degenerate triangles).
pub fn comparison_angle(kappa: f64, sides: &TriangleSides) -> Result<f64> {
    sides.check(kappa)?;
    let f = |x: f64| -> f64 {
        let x = x.max(0.0);
        if kappa > 0.0 {
            (kappa.sqrt() * x).sin()
        } else if kappa < 0.0 {
            ((-kappa).sqrt() * x).sinh()
        } else {
            x
        }
    };
    let TriangleSides { a, b, c } = *sides;
    let s = 0.5 * (a + b + c);
    let num = (f(s - b) * f(s - c)).max(0.0);
    let den = (f(s) * f(s - a)).max(0.0);
    if num == 0.0 && den == 0.0 {
        // two sides vanish; any angle works
        return Ok(0.0);
    }
    Ok(2.0 * num.sqrt().atan2(den.sqrt()))
}

/// Places `(P, Q, R)` with `P` at the origin and `Q` along direction 0;
/// `R` lies on the positive-angle side.
pub fn comparison_triangle(kappa: f64, sides: &TriangleSides) -> Result<[ModelPoint2; 3]> {
    let alpha = comparison_angle(kappa, sides)?;
    Ok([
        ModelPoint2::origin(kappa),
        model_point_polar(kappa, sides.c, 0.0),
        model_point_polar(kappa, sides.b, alpha),
    ])
}

/// Angle at `r` between the geodesics towards `p` and `q`, read off the
/// embedding (tangent vectors), independently of any trigonometric law.
pub fn vertex_angle(p: &ModelPoint2, q: &ModelPoint2, r: &ModelPoint2) -> Result<f64> {
    if p.kappa != r.kappa || q.kappa != r.kappa {
        return Err(GossipError::KappaMismatch { expected: r.kappa, found: p.kappa });
    }
    match (&p.coords, &q.coords, &r.coords) {
        (ModelCoords::Plane(x), ModelCoords::Plane(y), ModelCoords::Plane(z)) => {
            let u = [x[0] - z[0], x[1] - z[1]];
            let v = [y[0] - z[0], y[1] - z[1]];
            Ok((u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]))
        }
        (ModelCoords::Sphere(x), ModelCoords::Sphere(y), ModelCoords::Sphere(z)) => {
            let tangent = |w: &Vec3| {
                let c = dot(w, z);
                [w[0] - c * z[0], w[1] - c * z[1], w[2] - c * z[2]]
            };
            let (u, v) = (tangent(x), tangent(y));
            Ok(norm(&cross(&u, &v)).atan2(dot(&u, &v)))
        }
        (ModelCoords::Hyperbolic(x), ModelCoords::Hyperbolic(y), ModelCoords::Hyperbolic(z)) => {
            let tangent = |w: &Vec3| {
                let c = minkowski(w, z);
                [w[0] + c * z[0], w[1] + c * z[1], w[2] + c * z[2]]
            };
            let (u, v) = (tangent(x), tangent(y));
            let cos = minkowski(&u, &v) / (minkowski(&u, &u) * minkowski(&v, &v)).sqrt();
            Ok(cos.clamp(-1.0, 1.0).acos())
        }
        _ => Err(GossipError::InvalidPoint("model point coordinates do not match kappa".into())),
    }
}

/// Left minus right side of the law of cosines at vertex `r` with angle
/// `alpha`:
/// `C(d(p,q)) - C(d(p,r)) C(d(q,r)) - k S(d(p,r)) S(d(q,r)) cos(alpha)`.
/// For `k = 0` the Euclidean form `d(p,q)^2 - d(p,r)^2 - d(q,r)^2 +
/// 2 d(p,r) d(q,r) cos(alpha)` is used.
pub fn law_of_cosines_residual(
    kappa: f64,
    p: &ModelPoint2,
    q: &ModelPoint2,
    r: &ModelPoint2,
    alpha: f64,
) -> Result<f64> {
    let dpq = model_distance(p, q)?;
    let dpr = model_distance(p, r)?;
    let dqr = model_distance(q, r)?;
    if kappa == 0.0 {
        return Ok(dpq * dpq - dpr * dpr - dqr * dqr + 2.0 * dpr * dqr * alpha.cos());
    }
    Ok(c_kappa(kappa, dpq)?
        - c_kappa(kappa, dpr)? * c_kappa(kappa, dqr)?
        - kappa * s_kappa(kappa, dpr)? * s_kappa(kappa, dqr)? * alpha.cos())
}

/// `2 C(d(m,r)) C(d(p,q)/2) - C(d(p,r)) - C(d(q,r))` with `m` the midpoint
/// of `p` and `q`; nonnegative in a CAT(k) space with `k > 0`.
pub fn check_midpoint_cosine(
    kind: SpaceKind,
    kappa: f64,
    p: &SpacePoint,
    q: &SpacePoint,
    r: &SpacePoint,
) -> Result<f64> {
    let bound = CurvatureBound::new(kappa);
    if !bound.is_positive() {
        return Err(GossipError::domain(format!("midpoint-cosine check needs kappa > 0, got {kappa}")));
    }
    let dpq = geodesic::distance(kind, p, q)?;
    let dpr = geodesic::distance(kind, p, r)?;
    let dqr = geodesic::distance(kind, q, r)?;
    let worst = dpq.max(dpr).max(dqr);
    if worst >= bound.r_kappa {
        return Err(GossipError::domain(format!(
            "distance {worst} is not below r_kappa = {}",
            bound.r_kappa
        )));
    }
    let m = geodesic::midpoint(kind, p, q)?;
    let dmr = geodesic::distance(kind, &m, r)?;
    // 2 C(x) C(y) - C(u) - C(v) rewritten with chi = 1 - C to avoid
    // cancellation between O(1) terms
    let (xm, xh, xp, xq) = (
        chi_unchecked(kappa, dmr),
        chi_unchecked(kappa, dpq / 2.0),
        chi_unchecked(kappa, dpr),
        chi_unchecked(kappa, dqr),
    );
    Ok(xp + xq - 2.0 * (xm + xh) + 2.0 * xm * xh)
}

/// `d(p,q)^2 + d(p,r)^2 - d(q,r)^2 / 2 - 2 d(p,m)^2` with `m` the midpoint of
/// `q` and `r`; nonnegative in a CAT(0) space.
pub fn check_bruhat_tits(kind: SpaceKind, p: &SpacePoint, q: &SpacePoint, r: &SpacePoint) -> Result<f64> {
    if !kind.is_cat0() {
        return Err(GossipError::UnsupportedSpace { op: "bruhat_tits", space: kind });
    }
    let m = geodesic::midpoint(kind, q, r)?;
    let dpq = geodesic::distance(kind, p, q)?;
    let dpr = geodesic::distance(kind, p, r)?;
    let dqr = geodesic::distance(kind, q, r)?;
    let dpm = geodesic::distance(kind, p, &m)?;
    Ok(dpq * dpq + dpr * dpr - 0.5 * dqr * dqr - 2.0 * dpm * dpm)
}

/// Radical inverse of `i` in `base`: a low-discrepancy sequence in `[0, 1)`.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut x = 0.0;
    while i > 0 {
        f /= base as f64;
        x += f * (i % base) as f64;
        i /= base;
    }
    x
}

/// Minimum over `samples` parameter pairs `(t, t')` of
/// `d_model(P(t), R(t')) - d(gamma_pq(t), gamma_pr(t'))`, comparing points on
/// the two sides through `p` with their images in the comparison triangle.
pub fn check_cat_inequality(
    kind: SpaceKind,
    kappa: f64,
    p: &SpacePoint,
    q: &SpacePoint,
    r: &SpacePoint,
    samples: usize,
) -> Result<f64> {
    let sides = TriangleSides::new(
        geodesic::distance(kind, q, r)?,
        geodesic::distance(kind, p, r)?,
        geodesic::distance(kind, p, q)?,
    );
    let alpha = comparison_angle(kappa, &sides)?;
    let mut worst = f64::INFINITY;
    for i in 1..=samples as u64 {
        let (t, u) = (halton(i, 2), halton(i, 3));
        let x = geodesic::geodesic_point(kind, p, q, t)?;
        let y = geodesic::geodesic_point(kind, p, r, u)?;
        let actual = geodesic::distance(kind, &x, &y)?;
        let xb = model_point_polar(kappa, t * sides.c, 0.0);
        let yb = model_point_polar(kappa, u * sides.b, alpha);
        worst = worst.min(model_distance(&xb, &yb)? - actual);
    }
    Ok(worst)
}

/// `pi / sqrt(k)` for `k > 0`: the diameter of the model sphere.
pub fn model_diameter(kappa: f64) -> f64 {
    CurvatureBound::new(kappa).d_kappa
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn chi_examples() {
        assert_eq!(chi_kappa(1.0, 0.0).unwrap(), 0.0);
        assert!((chi_kappa(1.0, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
        assert!((chi_kappa(0.25, PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(chi_kappa(1.0, -0.1).is_err());
        assert!(chi_kappa(0.0, 0.1).is_err());
    }

    #[test]
    fn trig_identity() {
        for kappa in [-2.0, -0.5, 0.0, 0.25, 1.0, 4.0] {
            for t in [0.0, 0.1, 0.7, 1.3] {
                let c = c_kappa(kappa, t).unwrap();
                let s = s_kappa(kappa, t).unwrap();
                assert!((c * c + kappa * s * s - 1.0).abs() < 1e-12, "kappa={kappa} t={t}");
            }
        }
    }

    #[test]
    fn distance_examples() {
        let e1 = ModelPoint2::new(1.0, ModelCoords::Sphere([1.0, 0.0, 0.0])).unwrap();
        let e2 = ModelPoint2::new(1.0, ModelCoords::Sphere([0.0, 1.0, 0.0])).unwrap();
        assert!((model_distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);

        let o = ModelPoint2::new(-1.0, ModelCoords::Hyperbolic([1.0, 0.0, 0.0])).unwrap();
        let h = ModelPoint2::new(-1.0, ModelCoords::Hyperbolic([1f64.cosh(), 1f64.sinh(), 0.0])).unwrap();
        assert!((model_distance(&o, &h).unwrap() - 1.0).abs() < 1e-14);

        let n = ModelPoint2::new(4.0, ModelCoords::Sphere([1.0, 0.0, 0.0])).unwrap();
        let s = ModelPoint2::new(4.0, ModelCoords::Sphere([-1.0, 0.0, 0.0])).unwrap();
        assert!((model_distance(&n, &s).unwrap() - FRAC_PI_2).abs() < 1e-15);

        assert!(matches!(model_distance(&e1, &n), Err(GossipError::KappaMismatch { .. })));
    }

    #[test]
    fn rejects_points_off_the_model() {
        assert!(ModelPoint2::new(1.0, ModelCoords::Sphere([1.0, 1.0, 0.0])).is_err());
        assert!(ModelPoint2::new(-1.0, ModelCoords::Hyperbolic([-1.0, 0.0, 0.0])).is_err());
        assert!(ModelPoint2::new(0.0, ModelCoords::Sphere([1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn euclidean_right_triangle() {
        let [p, q, r] = comparison_triangle(0.0, &TriangleSides::new(5.0, 4.0, 3.0)).unwrap();
        assert!((model_distance(&p, &q).unwrap() - 3.0).abs() < 1e-14);
        assert!((model_distance(&p, &r).unwrap() - 4.0).abs() < 1e-14);
        assert!((model_distance(&q, &r).unwrap() - 5.0).abs() < 1e-14);
        let ModelCoords::Plane(rc) = r.coords else { panic!() };
        assert!(rc[0].abs() < 1e-14 && (rc[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn octant_triangle() {
        let h = FRAC_PI_2;
        let [p, q, r] = comparison_triangle(1.0, &TriangleSides::new(h, h, h)).unwrap();
        for (pt, e) in [(p, [1.0, 0.0, 0.0]), (q, [0.0, 1.0, 0.0]), (r, [0.0, 0.0, 1.0])] {
            let ModelCoords::Sphere(x) = pt.coords else { panic!() };
            for i in 0..3 {
                assert!((x[i] - e[i]).abs() < 1e-15);
            }
        }
        let alpha = vertex_angle(&p, &q, &r).unwrap();
        assert!((alpha - h).abs() < 1e-15);
        assert!(law_of_cosines_residual(1.0, &p, &q, &r, h).unwrap().abs() < 1e-15);
    }

    #[test]
    fn spherical_placement_reproduces_sides() {
        let sides = TriangleSides::new(0.3, 0.4, 0.6);
        let [p, q, r] = comparison_triangle(1.0, &sides).unwrap();
        assert!((model_distance(&q, &r).unwrap() - 0.3).abs() < 1e-9);
        assert!((model_distance(&p, &r).unwrap() - 0.4).abs() < 1e-9);
        assert!((model_distance(&p, &q).unwrap() - 0.6).abs() < 1e-9);
        // spherical law of cosines for the angle at P
        let (a, b, c): (f64, f64, f64) = (0.3, 0.4, 0.6);
        let expected = ((a.cos() - b.cos() * c.cos()) / (b.sin() * c.sin())).acos();
        assert!((comparison_angle(1.0, &sides).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn infeasible_triangles() {
        assert!(comparison_triangle(0.0, &TriangleSides::new(1.0, 1.0, 3.0)).is_err());
        assert!(comparison_triangle(1.0, &TriangleSides::new(3.0, 3.0, 0.5)).is_err());
        assert!(comparison_triangle(1.0, &TriangleSides::new(3.2, 3.2, 0.1)).is_err());
    }

    #[test]
    fn degenerate_law_of_cosines() {
        let p = model_point_polar(1.0, 0.5, 0.3);
        let q = model_point_polar(1.0, 0.2, 1.1);
        assert_eq!(law_of_cosines_residual(1.0, &p, &q, &q, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn halton_values() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(2, 3) - 2.0 / 3.0).abs() < 1e-15);
    }
}
