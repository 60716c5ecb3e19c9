//! Moment polytopes of the real locus of products of isospectral orbits.
//!
//! The manifold is `M = O(λ1) × … × O(λk)`, a product of Hermitian matrices
//! with prescribed spectra, and `Z ⊂ M` is its real locus (real symmetric
//! matrices) acted on by `K = SO(n)` inside `G = GL(n, ℝ)⁺`. The moment map is
//! the sum of the factors and the polytope is the set of sorted spectra of that
//! sum. The crate generates the facet inequalities of the polytope from
//! infinitesimal real Ressayre pairs and checks them against independent
//! numerical oracles:
//!
//! * [`lie`]: exact root systems, coroots, Weyl groups, chamber faces;
//! * [`polytope`]: hulls, affine hulls, membership, nearest-point projection;
//! * [`orbit`]: sampling on the concrete manifold, group action, tangent map,
//!   fixed-point components and Bialynicki-Birula limits;
//! * [`flow`]: the norm-square gradient flow and its shifted variant;
//! * [`ressayre`]: the rank test, pair families and the inequality system.

pub mod error;
pub mod flow;
pub mod lie;
pub mod linalg;
pub mod orbit;
pub mod polytope;
pub mod ressayre;

pub use error::{Error, Result};
