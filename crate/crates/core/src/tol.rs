//! Numerical tolerances shared across the crate.
//!
//! Every threshold that decides whether a value is valid, degenerate, or
//! close enough lives here. Matrix spaces are dominated by the error of the
//! 3x3 symmetric eigensolver, hence the looser geodesic tolerances there.

/// Type invariants: symmetry of SPD matrices, unit norm of sphere points,
/// positivity of SPD eigenvalues.
pub const INVARIANT: f64 = 1e-12;

/// Orthogonality of rotation matrices, `||R^T R - I||_F`.
pub const ROTATION_ORTHOGONALITY: f64 = 1e-10;

/// Guard against (near-)antipodal pairs whose geodesic is not unique.
pub const DOMAIN_GUARD: f64 = 1e-9;

/// Distances below this are treated as `p == q`: geodesics are constant.
pub const COINCIDENT: f64 = 1e-12;

/// Geodesic identities on vector-like spaces (sphere, tree, euclidean).
pub const GEODESIC: f64 = 1e-8;

/// Geodesic identities on matrix spaces (SPD, SO(3)).
pub const GEODESIC_MATRIX: f64 = 1e-7;

/// Re-orthonormalize a rotation after a product when drift exceeds this.
pub const ROTATION_DRIFT: f64 = 1e-12;

/// Small-angle branch of the SO(3) exponential and logarithm.
pub const SO3_SMALL_ANGLE: f64 = 1e-4;

/// A configuration whose diameter falls below this is declared at consensus.
pub const CONSENSUS_DIAMETER: f64 = 1e-10;

/// Minimum eigenvalue accepted for Wishart samples before resampling.
pub const WISHART_MIN_EIGENVALUE: f64 = 1e-10;

/// Maximum number of resampling attempts for initial configurations.
pub const MAX_INIT_RETRIES: usize = 100;
