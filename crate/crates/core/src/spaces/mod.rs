//! The five concrete spaces behind the [`GeodesicSpace`](crate::geodesic::GeodesicSpace)
//! contract.

mod euclidean;
pub mod linalg;
mod so3;
mod spd;
mod sphere;
mod tree;

pub use euclidean::Euclidean;
pub use linalg::{Mat3, Vec3};
pub use so3::{so3_exp, so3_log, Rotation, So3};
pub use spd::{Spd, SpdMatrix};
pub use sphere::{Sphere, SphereVec};
pub use tree::{Letter, Tree, TreeGeodesicDecomposition, TreePoint, Word};

use crate::error::Result;
use crate::geodesic::GeodesicSpace;

pub fn spd_distance(m: &SpdMatrix, n: &SpdMatrix) -> Result<f64> {
    Spd::distance(m, n)
}

pub fn spd_geodesic(m: &SpdMatrix, n: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    Spd::geodesic_point(m, n, t)
}

pub fn tree_distance(x1: &TreePoint, x2: &TreePoint) -> (f64, TreeGeodesicDecomposition) {
    let dec = TreeGeodesicDecomposition::of(x1, x2);
    (dec.length(), dec)
}

pub fn tree_geodesic_point(x1: &TreePoint, x2: &TreePoint, t: f64) -> Result<TreePoint> {
    Tree::geodesic_point(x1, x2, t)
}
