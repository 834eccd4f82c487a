//! Exact computational algebra for subspace lattices over finite fields.
//!
//! The library builds the lowering/raising operator algebras attached to a
//! flag `x ⊂ H` of subspaces, catalogs their irreducible modules, constructs
//! the twisted Grassmann graph together with the Terwilliger algebra of a
//! base vertex in its small orbit, and decomposes the standard module into
//! irreducible pieces.  Every closed-form quantity (cell sizes, module
//! dimensions, multiplicities, tridiagonal action coefficients) is checked
//! against an independently computed concrete realization, so the crate
//! doubles as a mechanical verifier for the underlying classification.
//!
//! Arithmetic is exact (`BigInt`/`BigRational`) wherever a computation is
//! defined over the rationals; character-theoretic paths over fields with
//! more than two elements use complex floating point with an explicit
//! tolerance.  The linear algebra layer is generic over [`scalar::Scalar`]
//! to serve both regimes with one implementation.

pub mod check;
pub mod elim;
pub mod error;
pub mod gf;
pub mod graph;
pub mod hcatalog;
pub mod htrep;
pub mod lattice;
pub mod qarith;
pub mod scalar;
pub mod sparse;
pub mod subspace;
pub mod tdecomp;

/// Exact arbitrary-precision integer.
pub type Int = num_bigint::BigInt;
/// Exact arbitrary-precision rational.
pub type Rat = num_rational::BigRational;
/// Complex double, used for root-of-unity character sums when q > 2.
pub type Cpx = num_complex::Complex64;
/// Sparse rational vector: sorted `(coordinate, value)` pairs, values nonzero.
pub type QVec = Vec<(u32, Rat)>;

pub use check::CheckResult;
pub use error::Error;

/// Tolerance for approximate (complex) verification paths.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Tolerance when snapping an approximate quantity to an integer.
pub const INT_SNAP_TOL: f64 = 1e-6;
