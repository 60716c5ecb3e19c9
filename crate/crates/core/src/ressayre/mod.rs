//! Real Ressayre pairs: the rank test for `ρ_x^γ`, the candidate families
//! driven by a sampled polytope, and the inequality system they cut out.

mod criterion;
mod emit;
mod families;
mod verify;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::lie::{rational_string, RationalVector};
use crate::orbit::ComponentDescriptor;

pub use criterion::{
    component_table, dim_p_component, dim_p_z, infinitesimal_pair_test, is_admissible, n_gamma_positive,
    tangent_gamma_positive, weight_decomposition, Admissibility, RankWitness, WeightDecomposition,
};
pub use emit::{emit_inequalities, Equality, Inequality, InequalitySystem};
pub use families::{
    build_pair, exhaustive_pairs, generate_affine_pairs, generate_facet_pairs, generate_gamma_s_pairs,
    generate_projection_pair, FacetOutcome, PairOptions,
};
pub use verify::{verify_theorem, FacetCertificate, VerificationReport, VerifyOptions};

/// Which construction produced a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    GammaS,
    Affine,
    Facet,
    Projection,
    Exhaustive,
}

/// A candidate pair `(γ, 𝒞)` with its inequality `⟨ξ, γ⟩ ≥ value`.
#[derive(Debug, Clone, PartialEq)]
pub struct RessayrePair {
    pub gamma: RationalVector,
    pub component: ComponentDescriptor,
    /// `⟨Φ_p(𝒞), γ⟩`.
    pub value: BigRational,
    pub admissible: bool,
    /// `is_pair` and `dim_p(𝒞) − dim_p(𝒵) ∈ {0, 1}`.
    pub regular: bool,
    pub is_pair: bool,
    pub rank: RankWitness,
    pub provenance: Provenance,
    /// Sampled `dim_p(𝒵)` and `dim_p(𝒞)`.
    pub dim_z: usize,
    pub dim_c: usize,
}

impl RessayrePair {
    /// Violation of the pair's inequality at `xi` (positive when violated).
    pub fn violation(&self, xi: &[f64]) -> f64 {
        crate::lie::rational_to_f64(&self.value) - self.gamma.dot_f64(xi)
    }
}

#[derive(Serialize)]
struct PairJson<'a> {
    gamma: Vec<String>,
    blocks: &'a [Vec<usize>],
    assignments: &'a [Vec<usize>],
    #[serde(with = "rational_string")]
    value: BigRational,
    admissible: bool,
    regular: bool,
    is_pair: bool,
    rank: &'a RankWitness,
    provenance: Provenance,
    dim_z: usize,
    dim_c: usize,
}

impl Serialize for RessayrePair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PairJson {
            gamma: self.gamma.to_strings(),
            blocks: &self.component.blocks,
            assignments: &self.component.assignments,
            value: self.value.clone(),
            admissible: self.admissible,
            regular: self.regular,
            is_pair: self.is_pair,
            rank: &self.rank,
            provenance: self.provenance,
            dim_z: self.dim_z,
            dim_c: self.dim_c,
        }
        .serialize(s)
    }
}
