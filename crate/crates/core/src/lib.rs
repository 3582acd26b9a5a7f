//! Random pairwise midpoint gossip on CAT(k) metric spaces.
//!
//! Agents on a connected graph each hold a point of a geodesic metric space.
//! At every tick one agent wakes up, picks a uniform neighbour, and both
//! replace their states by the geodesic midpoint. The crate provides the
//! spaces, the graph model, the gossip engine, the variance/disagreement
//! functionals, comparison-geometry checkers and an experiment runner.

pub mod engine;
pub mod error;
pub mod experiment;
pub mod geodesic;
pub mod model;
pub mod network;
pub mod spaces;
pub mod stats;
pub mod suite;
pub mod tol;

pub use error::{GossipError, Result};
pub use geodesic::{distance, geodesic_point, midpoint, CurvatureBound, GeodesicSpace, SpaceKind, SpacePoint};
