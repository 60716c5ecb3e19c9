//! Exact root-system combinatorics on `𝔞 ≅ ℝ^dim`.
//!
//! Roots, coroots and the rational vectors built from them are stored as
//! [`RationalVector`]s. The inner product is the identity Gram matrix, positive
//! roots are fixed by the regular vector `(1, 1/2, 1/4, …)`, so the type `A`
//! chamber consists of weakly decreasing vectors.

mod rational;
mod roots;
mod weyl;

pub use rational::{
    approximate, parse_rational, rational_string, rational_to_f64, rationalize_direction, RationalVector,
};
pub use roots::{
    build_root_system, coroot, gamma_s, nullspace_exact, regular_vector, solve_exact, ChamberFace, RootFamily,
    RootSystem,
};
pub use weyl::{
    dominant_sweep, is_dominant, next_permutation, weyl_elements, weyl_order, WeylElement, DEFAULT_WEYL_BOUND,
};
