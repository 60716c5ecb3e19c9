use serde::{Deserialize, Serialize};

use super::criterion::dim_p_z;
use super::emit::{emit_inequalities, InequalitySystem};
use super::families::{
    exhaustive_pairs, generate_affine_pairs, generate_facet_pairs, generate_gamma_s_pairs, FacetOutcome, PairOptions,
};
use super::RessayrePair;
use crate::error::{Error, Result};
use crate::orbit::{sample_chamber, Mode, OrbitProblem, Sampler};
use crate::polytope::{compare_regions, hull_from_points};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub samples: usize,
    pub sampler: Sampler,
    pub hull_tol: f64,
    pub soundness_tol: f64,
    pub hausdorff_tol: f64,
    /// A non-trivial inequality counts as tight when some sample has slack
    /// at most this.
    pub tightness_tol: f64,
    /// Max slack of a sampled facet's vertices on the inequality certifying it.
    pub certificate_tol: f64,
    /// Adds the exhaustive indicator family.
    pub exhaustive: bool,
    pub pairs: PairOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            samples: 10_000,
            sampler: Sampler::default(),
            hull_tol: 1e-7,
            soundness_tol: 1e-8,
            hausdorff_tol: 1e-2,
            tightness_tol: 1e-3,
            certificate_tol: 1e-2,
            exhaustive: false,
            pairs: PairOptions::default(),
        }
    }
}

/// Sampled facet matched against the emitted system.
#[derive(Debug, Clone, Serialize)]
pub struct FacetCertificate {
    pub facet: usize,
    /// Index of the emitted inequality containing the facet's vertices.
    pub inequality: Option<usize>,
    pub max_slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub polytope_dim: usize,
    pub hull_vertices: Vec<Vec<f64>>,
    pub dim_z: usize,
    pub pairs: Vec<RessayrePair>,
    pub facets: Vec<FacetOutcome>,
    pub system: InequalitySystem,
    /// Max over samples of the largest violation of the emitted system.
    pub soundness_violation: f64,
    /// Per emitted inequality, the least slack over the samples.
    pub min_slack: Vec<f64>,
    pub hausdorff: f64,
    pub region_bounded: bool,
    pub region_vertices: Vec<Vec<f64>>,
    pub certificates: Vec<FacetCertificate>,
    pub warnings: Vec<String>,
    pub sound: bool,
    pub tight: bool,
    pub complete: bool,
    pub certified: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.sound && self.tight && self.complete && self.certified
    }
}

/// Sample → hull → pair families → emitted system → comparison.
pub fn verify_theorem(p: &OrbitProblem, opts: &VerifyOptions) -> Result<VerificationReport> {
    p.validate().map_err(|e| e.in_stage("problem"))?;
    opts.pairs.flow.validate().map_err(|e| e.in_stage("problem"))?;
    if opts.samples == 0 {
        return Err(Error::invalid("sample count must be positive").in_stage("sample"));
    }
    let cloud = sample_chamber(p, opts.seed, opts.samples, opts.sampler);
    let poly = hull_from_points(&cloud, opts.hull_tol * p.scale()).map_err(|e| e.in_stage("hull"))?;

    let real = p.with_mode(Mode::Real);
    let po = PairOptions { seed: opts.seed, ..opts.pairs };
    let dim_z = dim_p_z(&real, po.dim_budget, po.stabilizer_tol, po.seed).map_err(|e| e.in_stage("pairs"))?;
    let mut warnings = Vec::new();
    let mut pairs = generate_gamma_s_pairs(&real, &poly, dim_z, &po).map_err(|e| e.in_stage("pairs"))?;
    let (affine, w) = generate_affine_pairs(&real, &poly, dim_z, &po).map_err(|e| e.in_stage("pairs"))?;
    pairs.extend(affine);
    warnings.extend(w);
    let (facet_pairs, mut facets) = generate_facet_pairs(&real, &poly, dim_z, &po).map_err(|e| e.in_stage("pairs"))?;
    let offset = pairs.len();
    for f in facets.iter_mut() {
        f.pair = f.pair.map(|i| i + offset);
        if let Some(note) = &f.note {
            warnings.push(format!("facet {}: {note}", f.facet));
        }
    }
    pairs.extend(facet_pairs);
    if opts.exhaustive {
        pairs.extend(exhaustive_pairs(&real, dim_z, &po).map_err(|e| e.in_stage("pairs"))?);
    }

    let system = emit_inequalities(&pairs, &real.root_system());
    let hrep = system.to_hrep();
    let cmp = compare_regions(&hrep, &cloud, opts.hull_tol * p.scale()).map_err(|e| e.in_stage("compare"))?;

    let scale = p.scale();
    let certificates: Vec<FacetCertificate> = poly
        .facet_vertices
        .iter()
        .enumerate()
        .map(|(i, fv)| {
            let best = hrep
                .halfspaces
                .iter()
                .enumerate()
                .map(|(j, h)| (j, fv.iter().map(|&v| h.slack(&poly.vertices[v]).abs()).fold(0.0, f64::max)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((j, s)) if s <= opts.certificate_tol * scale => {
                    FacetCertificate { facet: i, inequality: Some(j), max_slack: s }
                }
                Some((_, s)) => FacetCertificate { facet: i, inequality: None, max_slack: s },
                None => FacetCertificate { facet: i, inequality: None, max_slack: f64::INFINITY },
            }
        })
        .collect();

    let sound = cmp.soundness_violation <= opts.soundness_tol * scale;
    let tight = system
        .inequalities
        .iter()
        .zip(&cmp.facet_min_slack)
        .all(|(ineq, s)| ineq.chamber || *s <= opts.tightness_tol * scale);
    let complete = cmp.region_bounded && cmp.hausdorff <= opts.hausdorff_tol * scale;
    let certified = certificates.iter().all(|c| c.inequality.is_some());
    Ok(VerificationReport {
        samples: cloud.len(),
        polytope_dim: poly.dim(),
        hull_vertices: poly.vertices.clone(),
        dim_z,
        pairs,
        facets,
        system,
        soundness_violation: cmp.soundness_violation,
        min_slack: cmp.facet_min_slack,
        hausdorff: cmp.hausdorff,
        region_bounded: cmp.region_bounded,
        region_vertices: cmp.region_vertices,
        certificates,
        warnings,
        sound,
        tight,
        complete,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_orbit_is_a_point() {
        let p = OrbitProblem::from_ints(&[&[2, 1, 0]], Mode::Real).unwrap();
        let r = verify_theorem(&p, &VerifyOptions { samples: 200, ..Default::default() }).unwrap();
        assert_eq!(r.polytope_dim, 0);
        assert_eq!(r.system.equalities.len(), 3);
        assert!(r.passed(), "{r:?}");
        assert!(r.hausdorff < 1e-9);
    }

    #[test]
    fn zero_samples_fail_with_stage() {
        let p = OrbitProblem::from_ints(&[&[1, 0]], Mode::Real).unwrap();
        let err = verify_theorem(&p, &VerifyOptions { samples: 0, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "sample", .. }));
    }
}
