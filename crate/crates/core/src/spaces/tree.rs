//! The metric tree of the free group on two generators: vertices are
//! reduced words over `{a, a^-1, b, b^-1}`, every edge `w -> w l` has unit
//! length.
//!
//! A point is stored as `(w, lambda)`: it lies on the edge entering vertex
//! `w` from its parent, at distance `lambda` from the parent. Vertices are
//! represented with `lambda = 1` on their incoming edge and the root is
//! `(e, 0)`, which makes equality canonical. The depth of `(w, lambda)` is
//! `|w| - 1 + lambda`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GossipError, Result};
use crate::geodesic::{check_fraction, GeodesicSpace, SpaceKind};
use crate::tol;

/// Generators and their inverses, encoded so that `inverse(l) = l ^ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Letter {
    A = 0,
    AInv = 1,
    B = 2,
    BInv = 3,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn from_index(i: u8) -> Letter {
        Letter::ALL[(i & 3) as usize]
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn inverse(self) -> Letter {
        Letter::from_index(self.index() ^ 1)
    }

    /// `a`, `b` for generators, `A`, `B` for their inverses.
    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'A' => Some(Letter::AInv),
            'b' => Some(Letter::B),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }
}

/// A reduced word: no letter is followed by its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Letter>", into = "Vec<Letter>")]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Accepts only reduced sequences.
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if let Some(i) = letters.windows(2).position(|w| w[1] == w[0].inverse()) {
            return Err(GossipError::InvalidPoint(format!(
                "word is not reduced at position {i}"
            )));
        }
        Ok(Word(letters))
    }

    /// Free reduction by cancelling adjacent inverse pairs.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }

    /// Parses `a`, `A` (= a^-1), `b`, `B` (= b^-1); `e` or the empty string
    /// is the identity. The result must already be reduced.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::empty());
        }
        let letters = s
            .chars()
            .map(|c| {
                Letter::from_char(c)
                    .ok_or_else(|| GossipError::Parse(format!("invalid letter `{c}` in word `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Word::new(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Group product: concatenation followed by reduction.
    pub fn concat_reduce(&self, other: &Word) -> Word {
        Word::reduce(self.0.iter().chain(other.0.iter()).copied())
    }
}

impl TryFrom<Vec<Letter>> for Word {
    type Error = GossipError;
    fn try_from(v: Vec<Letter>) -> Result<Self> {
        Word::new(v)
    }
}

impl From<Word> for Vec<Letter> {
    fn from(w: Word) -> Self {
        w.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    word: Word,
    lambda: f64,
}

impl TreePoint {
    /// `(w, lambda)` with `lambda` in `(0, 1]`, or the root `(e, 0)`.
    pub fn new(word: Word, lambda: f64) -> Result<Self> {
        if word.is_empty() {
            if lambda != 0.0 {
                return Err(GossipError::InvalidPoint(format!(
                    "root must have offset 0, got {lambda}"
                )));
            }
        } else if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(GossipError::InvalidPoint(format!(
                "edge offset {lambda} outside (0, 1]"
            )));
        }
        Ok(TreePoint { word, lambda })
    }

    pub fn root() -> Self {
        TreePoint { word: Word::empty(), lambda: 0.0 }
    }

    /// The vertex `w` itself.
    pub fn vertex(word: Word) -> Self {
        if word.is_empty() {
            Self::root()
        } else {
            TreePoint { word, lambda: 1.0 }
        }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_root(&self) -> bool {
        self.word.is_empty()
    }

    /// Distance from the root.
    pub fn depth(&self) -> f64 {
        if self.word.is_empty() {
            0.0
        } else {
            (self.word.len() - 1) as f64 + self.lambda
        }
    }

    /// The point at `depth` on the path from the root to vertex `word`.
    fn on_ray(word: &Word, depth: f64) -> TreePoint {
        let len = word.len() as f64;
        let depth = depth.clamp(0.0, len);
        let nearest = depth.round();
        if (depth - nearest).abs() <= tol::INVARIANT {
            return TreePoint::vertex(word.prefix(nearest as usize));
        }
        let k = depth.ceil() as usize;
        TreePoint { word: word.prefix(k), lambda: depth - (k - 1) as f64 }
    }
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return write!(f, "(e,0)");
        }
        let parent = self.word.prefix(self.word.len() - 1);
        write!(f, "(({},{}),{})", parent, self.word, self.lambda)
    }
}

/// Splits the geodesic `[x1, x2]` at the junction `z` where the paths from
/// the root to `x1` and `x2` part ways.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeGeodesicDecomposition {
    pub junction: TreePoint,
    /// `d(x1, z)`
    pub leg1: f64,
    /// `d(z, x2)`
    pub leg2: f64,
}

impl TreeGeodesicDecomposition {
    pub fn of(x1: &TreePoint, x2: &TreePoint) -> Self {
        let (h1, h2) = (&x1.word, &x2.word);
        let p = h1.common_prefix_len(h2);
        let (d1, d2) = (x1.depth(), x2.depth());
        let junction = if h1 == h2 {
            // same edge: the shallower point is an ancestor of the other
            if x1.lambda <= x2.lambda { x1.clone() } else { x2.clone() }
        } else if p == h2.len() {
            x2.clone()
        } else if p == h1.len() {
            x1.clone()
        } else {
            TreePoint::vertex(h1.prefix(p))
        };
        let dz = junction.depth();
        TreeGeodesicDecomposition { junction, leg1: d1 - dz, leg2: d2 - dz }
    }

    pub fn length(&self) -> f64 {
        self.leg1 + self.leg2
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Tree;

impl Tree {
    pub fn decompose(x1: &TreePoint, x2: &TreePoint) -> TreeGeodesicDecomposition {
        TreeGeodesicDecomposition::of(x1, x2)
    }
}

impl GeodesicSpace for Tree {
    type Point = TreePoint;

    const KIND: SpaceKind = SpaceKind::Tree;

    fn distance(p: &TreePoint, q: &TreePoint) -> Result<f64> {
        Ok(TreeGeodesicDecomposition::of(p, q).length())
    }

    /// Walks `t * d(x1, x2)` from `x1`: up to the junction, then down
    /// towards `x2`.
    fn geodesic_point(x1: &TreePoint, x2: &TreePoint, t: f64) -> Result<TreePoint> {
        check_fraction(t)?;
        if t == 0.0 {
            return Ok(x1.clone());
        }
        if t == 1.0 {
            return Ok(x2.clone());
        }
        let dec = TreeGeodesicDecomposition::of(x1, x2);
        let d = dec.length();
        if d < tol::COINCIDENT {
            return Ok(x1.clone());
        }
        let s = t * d;
        let point = if s <= dec.leg1 {
            TreePoint::on_ray(&x1.word, x1.depth() - s)
        } else {
            TreePoint::on_ray(&x2.word, dec.junction.depth() + (s - dec.leg1))
        };
        Ok(point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(w: &str, lambda: f64) -> TreePoint {
        TreePoint::new(Word::parse(w).unwrap(), lambda).unwrap()
    }

    #[test]
    fn figure_example() {
        let x1 = pt("B", 1.0);
        let x2 = pt("ba", 1.0);
        assert_eq!(Tree::distance(&x1, &x2).unwrap(), 3.0);
        let m = Tree::midpoint(&x1, &x2).unwrap();
        assert_eq!(m.word(), &Word::parse("b").unwrap());
        assert!((m.lambda() - 0.5).abs() <= 1e-12);
        assert_eq!(m.to_string(), "((e,b),0.5)");
    }

    #[test]
    fn same_edge_and_identity() {
        let x = pt("abA", 0.25);
        let y = pt("abA", 0.75);
        assert_eq!(Tree::distance(&x, &x).unwrap(), 0.0);
        assert_eq!(Tree::distance(&x, &y).unwrap(), 0.5);
        assert_eq!(Tree::geodesic_point(&x, &y, 0.0).unwrap(), x);
    }

    #[test]
    fn prefix_case() {
        let x = pt("ab", 0.5);
        let y = pt("abbaB", 0.25);
        // depths 1.5 and 4.25
        assert!((Tree::distance(&x, &y).unwrap() - 2.75).abs() < 1e-15);
        assert!((Tree::distance(&y, &x).unwrap() - 2.75).abs() < 1e-15);
        let root = TreePoint::root();
        assert_eq!(Tree::distance(&root, &y).unwrap(), 4.25);
    }

    #[test]
    fn sibling_edges_from_one_vertex() {
        // both edges leave vertex `a`
        let x = pt("ab", 0.3);
        let y = pt("aB", 0.4);
        assert!((Tree::distance(&x, &y).unwrap() - 0.7).abs() < 1e-15);
        let dec = Tree::decompose(&x, &y);
        assert_eq!(dec.junction, TreePoint::vertex(Word::parse("a").unwrap()));
    }

    #[test]
    fn walking_to_the_junction_lands_on_it() {
        let x = pt("abab", 0.5);
        let y = pt("aBBa", 1.0);
        let dec = Tree::decompose(&x, &y);
        let d = dec.length();
        let z = Tree::geodesic_point(&x, &y, dec.leg1 / d).unwrap();
        assert_eq!(z, dec.junction);
        assert_eq!(z, TreePoint::vertex(Word::parse("a").unwrap()));
    }

    #[test]
    fn word_reduction() {
        let w = Word::parse("abAb").unwrap();
        assert!(Word::concat_reduce(&w, &w.inverse()).is_empty());
        assert!(Word::parse("aA").is_err());
        assert!(Word::parse("ax").is_err());
        let r = Word::reduce([Letter::A, Letter::B, Letter::BInv, Letter::A]);
        assert_eq!(r.to_string(), "aa");
    }

    #[test]
    fn point_validation() {
        assert!(TreePoint::new(Word::empty(), 0.5).is_err());
        assert!(TreePoint::new(Word::parse("a").unwrap(), 0.0).is_err());
        assert!(TreePoint::new(Word::parse("a").unwrap(), 1.5).is_err());
        assert_eq!(TreePoint::root().depth(), 0.0);
    }

    #[test]
    fn vertices_are_canonical() {
        // reaching vertex `ab` from below must give (ab, 1), not (abX, 0)
        let x = pt("abb", 1.0);
        let y = pt("ab", 1.0);
        let g = Tree::geodesic_point(&x, &TreePoint::root(), 0.5).unwrap();
        assert_eq!(g.word(), &Word::parse("ab").unwrap());
        assert!((g.lambda() - 0.5).abs() < 1e-15);
        let v = Tree::geodesic_point(&x, &TreePoint::root(), 1.0 / 3.0).unwrap();
        assert_eq!(v, y);
    }
}
