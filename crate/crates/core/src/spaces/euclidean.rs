use crate::error::{GossipError, Result};
use crate::geodesic::{check_fraction, GeodesicSpace, SpaceKind};

/// Real coordinate space with the Euclidean norm.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

fn same_dim(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() == q.len() {
        Ok(())
    } else {
        Err(GossipError::SizeMismatch(format!(
            "euclidean points of dimension {} and {}",
            p.len(),
            q.len()
        )))
    }
}

impl GeodesicSpace for Euclidean {
    type Point = Vec<f64>;

    const KIND: SpaceKind = SpaceKind::Euclidean;

    fn distance(p: &Vec<f64>, q: &Vec<f64>) -> Result<f64> {
        same_dim(p, q)?;
        Ok(p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }

    fn geodesic_point(p: &Vec<f64>, q: &Vec<f64>, t: f64) -> Result<Vec<f64>> {
        same_dim(p, q)?;
        check_fraction(t)?;
        if t == 0.0 {
            return Ok(p.clone());
        }
        if t == 1.0 {
            return Ok(q.clone());
        }
        if Self::distance(p, q)? < crate::tol::COINCIDENT {
            return Ok(p.clone());
        }
        if t == 0.5 {
            // symmetric in p and q, and bitwise equal to the arithmetic mean
            return Ok(p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect());
        }
        Ok(p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(Euclidean::distance(&vec![0.0], &vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn geodesic_is_linear() {
        let p = vec![1.0, -1.0, 2.0];
        let q = vec![3.0, 1.0, 0.0];
        let g = Euclidean::geodesic_point(&p, &q, 0.25).unwrap();
        assert_eq!(g, vec![1.5, -0.5, 1.5]);
    }
}
