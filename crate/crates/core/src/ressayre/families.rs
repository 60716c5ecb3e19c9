use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::criterion::{dim_p_component, infinitesimal_pair_test};
use super::{Provenance, RessayrePair};
use crate::error::{Error, Result};
use crate::flow::{shifted_flow, FlowControls, ShiftedFlow};
use crate::lie::{approximate, gamma_s, rational_to_f64, rationalize_direction, ChamberFace, RationalVector};
use crate::linalg::{eigh_ascending, hermitian_part};
use crate::orbit::{
    bb_limit, component_moment_value, fixed_components, moment_p, sample_one, BbControls, ComponentDescriptor, Mode,
    OrbitPoint, OrbitProblem, RealPoint, Sampler, DEFAULT_COMPONENT_BOUND,
};
use crate::polytope::{affine_hull_basis, membership, Polytope};

/// Knobs shared by the pair families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairOptions {
    /// Random points per component in the rank test.
    pub trials: usize,
    /// Relative singular-value threshold of the rank test.
    pub rank_tol: f64,
    /// Samples per stabilizer-dimension estimate.
    pub dim_budget: usize,
    pub stabilizer_tol: f64,
    pub seed: u64,
    /// Facet probe distance, relative to the spectral scale.
    pub probe_delta: f64,
    /// Denominator bound and direction residual for facet normals.
    pub max_den: u64,
    pub rational_tol: f64,
    /// Tolerance for recognizing chamber walls among hull facets.
    pub wall_tol: f64,
    /// Shifted-flow seeds tried per probe.
    pub flow_attempts: u64,
    pub component_bound: u64,
    pub flow: FlowControls,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            trials: 8,
            rank_tol: 1e-7,
            dim_budget: 4,
            stabilizer_tol: 1e-7,
            seed: 0,
            probe_delta: 0.05,
            max_den: 64,
            rational_tol: 1e-5,
            wall_tol: 1e-3,
            flow_attempts: 3,
            component_bound: DEFAULT_COMPONENT_BOUND,
            flow: FlowControls::default(),
        }
    }
}

fn real(p: &OrbitProblem) -> OrbitProblem {
    p.with_mode(Mode::Real)
}

/// Evaluates every flag of `(γ, 𝒞)`; `dim_z` is the sampled `dim_p(𝒵)`.
pub fn build_pair(
    p: &OrbitProblem,
    c: &ComponentDescriptor,
    provenance: Provenance,
    dim_z: usize,
    opts: &PairOptions,
) -> Result<RessayrePair> {
    let p = &real(p);
    let value = component_moment_value(p, c)?;
    let (is_pair, rank, _) = infinitesimal_pair_test(p, c, opts.trials, opts.rank_tol, opts.seed)?;
    let dim_c = dim_p_component(p, c, opts.dim_budget, opts.stabilizer_tol, opts.seed)?;
    let within = |d: usize| d >= dim_z && d - dim_z <= 1;
    let mut dim_gamma = dim_c;
    if !within(dim_gamma) {
        for other in fixed_components(p, &c.gamma, opts.component_bound)? {
            if &other != c {
                dim_gamma = dim_gamma.min(dim_p_component(p, &other, opts.dim_budget, opts.stabilizer_tol, opts.seed)?);
            }
            if within(dim_gamma) {
                break;
            }
        }
    }
    Ok(RessayrePair {
        gamma: c.gamma.clone(),
        component: c.clone(),
        value,
        admissible: within(dim_gamma),
        regular: is_pair && within(dim_c),
        is_pair,
        rank,
        provenance,
        dim_z,
        dim_c,
    })
}

/// Component of `Z^γ` with the largest value among those passing the rank test.
fn best_pair_component(
    p: &OrbitProblem,
    gamma: &RationalVector,
    opts: &PairOptions,
) -> Result<Option<ComponentDescriptor>> {
    let mut best: Option<(BigRational, ComponentDescriptor)> = None;
    for c in fixed_components(p, gamma, opts.component_bound)? {
        let v = component_moment_value(p, &c)?;
        if best.as_ref().is_some_and(|(b, _)| *b >= v) {
            continue;
        }
        if infinitesimal_pair_test(p, &c, opts.trials, opts.rank_tol, opts.seed)?.0 {
            best = Some((v, c));
        }
    }
    Ok(best.map(|(_, c)| c))
}

/// Conjugates every factor by the eigenbasis of `Φ_p(z)` so that the moment
/// is diagonal with decreasing entries.
fn rotate_to_chamber(z: &RealPoint) -> RealPoint {
    let (_, q) = eigh_ascending(&moment_p(z));
    let n = q.ncols();
    let qd = DMatrix::from_fn(n, n, |i, j| q[(i, n - 1 - j)]);
    OrbitPoint { matrices: z.matrices.iter().map(|a| hermitian_part(&(qd.transpose() * a * &qd))).collect() }
}

/// Principal face of the chamber: the simple walls on which every vertex lies.
fn principal_face(p: &OrbitProblem, poly: &Polytope, tol: f64) -> Result<ChamberFace> {
    let rs = p.root_system();
    let s: BTreeSet<usize> = rs
        .simple_coroots()
        .iter()
        .enumerate()
        .filter(|(_, h)| poly.vertices.iter().all(|v| h.dot_f64(v).abs() <= tol * p.scale()))
        .map(|(i, _)| i)
        .collect();
    ChamberFace::new(&rs, s)
}

fn collect_bb_components(
    p: &OrbitProblem,
    gamma: &RationalVector,
    opts: &PairOptions,
    count: u64,
) -> Result<Vec<ComponentDescriptor>> {
    let mut out = BTreeSet::new();
    for i in 0..count {
        let z: RealPoint = rotate_to_chamber(&sample_one(p, opts.seed, i, Sampler::Haar));
        let (_, c, _) = bb_limit(p, &z, gamma, &BbControls::default())?;
        out.insert(c);
    }
    Ok(out.into_iter().collect())
}

/// Pairs `(γ_s, 𝒞_s)` for the principal face `s`; empty when `s` is the open
/// chamber, where `γ_s = 0`.
pub fn generate_gamma_s_pairs(
    p: &OrbitProblem,
    poly: &Polytope,
    dim_z: usize,
    opts: &PairOptions,
) -> Result<Vec<RessayrePair>> {
    let p = &real(p);
    let face = principal_face(p, poly, opts.wall_tol)?;
    if face.is_interior() {
        return Ok(Vec::new());
    }
    let g = gamma_s(&p.root_system(), &face);
    collect_bb_components(p, &g, opts, 4)?.iter().map(|c| build_pair(p, c, Provenance::GammaS, dim_z, opts)).collect()
}

/// Pairs `±η + γ_s` for a rational basis `η` of the normal space of the
/// affine hull of `poly`. Returns the pairs and warnings for normals that
/// could not be rationalized.
pub fn generate_affine_pairs(
    p: &OrbitProblem,
    poly: &Polytope,
    dim_z: usize,
    opts: &PairOptions,
) -> Result<(Vec<RessayrePair>, Vec<String>)> {
    let p = &real(p);
    let face = principal_face(p, poly, opts.wall_tol)?;
    let gs = gamma_s(&p.root_system(), &face);
    let aff = affine_hull_basis(&poly.vertices, 1e-7 * p.scale(), None)?;
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    for (i, eta) in aff.rational_normals.iter().enumerate() {
        let Some(eta) = eta else {
            warnings.push(format!("normal {i} of the affine hull is not rational within tolerance"));
            continue;
        };
        for sign in [1i64, -1] {
            let g = &eta.scale(&BigRational::from_integer(sign.into())) + &gs;
            for c in collect_bb_components(p, &g, opts, 1)? {
                let pair = build_pair(p, &c, Provenance::Affine, dim_z, opts)?;
                let expect = g.dot_f64(&poly.vertices[0]);
                if (rational_to_f64(&pair.value) - expect).abs() > 1e-6 * p.scale() * g.norm_f64() {
                    warnings
                        .push(format!("affine pair {g}: value {} differs from the slice value {expect}", pair.value));
                }
                pairs.push(pair);
            }
        }
    }
    Ok((pairs, warnings))
}

/// What happened to one facet of the sampled hull.
#[derive(Debug, Clone, Serialize)]
pub struct FacetOutcome {
    pub facet: usize,
    /// Unit inward normal and offset of the sampled facet.
    pub normal: Vec<f64>,
    pub offset: f64,
    /// The facet lies on a chamber wall.
    pub wall: bool,
    pub gamma: Option<RationalVector>,
    /// Index into the returned pair list.
    pub pair: Option<usize>,
    pub note: Option<String>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Simple coroot whose wall supports the facet `(normal, offset)` inside the
/// affine hull of `poly`.
fn wall_of(p: &OrbitProblem, poly: &Polytope, normal: &[f64], offset: f64, tol: f64) -> Option<RationalVector> {
    p.root_system().simple_coroots().into_iter().find(|h| {
        let hf = h.to_f64();
        let mut hp = vec![0.0; hf.len()];
        for b in &poly.affine_basis {
            let c = dot(&hf, b);
            hp.iter_mut().zip(b).for_each(|(x, bj)| *x += c * bj);
        }
        let norm = dot(&hp, &hp).sqrt();
        if norm < 1e-12 {
            return false;
        }
        let rest: Vec<f64> = hf.iter().zip(&hp).map(|(a, b)| a - b).collect();
        let k = dot(&rest, &poly.affine_basepoint);
        let dir = hp.iter().zip(normal).map(|(a, b)| (a / norm - b).powi(2)).sum::<f64>().sqrt();
        dir <= tol && (offset + k / norm).abs() <= tol * p.scale()
    })
}

fn run_probe(p: &OrbitProblem, xi: &[f64], opts: &PairOptions) -> Result<ShiftedFlow> {
    let mut last = None;
    for attempt in 0..opts.flow_attempts.max(1) {
        match shifted_flow(p, xi, &opts.flow, opts.seed.wrapping_add(attempt)) {
            Ok(sf) => return Ok(sf),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn probe_facet(
    p: &OrbitProblem,
    poly: &Polytope,
    i: usize,
    opts: &PairOptions,
) -> Result<(Option<RationalVector>, Option<ComponentDescriptor>, Option<String>)> {
    let h = &poly.halfspaces[i];
    if let Some(hw) = wall_of(p, poly, &h.normal, h.offset, opts.wall_tol) {
        let c = best_pair_component(p, &hw, opts)?;
        let note = c.is_none().then(|| "no component of the wall direction passes the rank test".to_string());
        return Ok((Some(hw), c, note));
    }
    let delta = opts.probe_delta * p.scale();
    let center = poly.facet_center(i);
    let xi: Vec<f64> = center.iter().zip(&h.normal).map(|(c, n)| c - delta * n).collect();
    if xi.windows(2).any(|w| w[0] <= w[1]) {
        return Ok((None, None, Some("probe leaves the open chamber".into())));
    }
    let sf = run_probe(p, &xi, opts)?;
    let Some(g) = rationalize_direction(&sf.gamma, opts.max_den, opts.rational_tol) else {
        return Ok((None, None, Some(format!("γ = {:?} is not rational within tolerance", sf.gamma))));
    };
    let (_, c, _) = bb_limit(p, &sf.rotated, &g, &BbControls::default())?;
    if infinitesimal_pair_test(p, &c, opts.trials, opts.rank_tol, opts.seed)?.0 {
        return Ok((Some(g), Some(c), None));
    }
    let fallback = best_pair_component(p, &g, opts)?;
    let note = Some(match fallback {
        Some(_) => "limit component fails the rank test; using the best passing component".to_string(),
        None => "no component passes the rank test".to_string(),
    });
    Ok((Some(g), fallback, note))
}

/// One pair per facet of the sampled hull. Chamber-wall facets use the wall
/// coroot directly; the others are probed from outside with the shifted
/// flow, whose direction `ξ' − ξ` is rationalized into `γ_F`.
pub fn generate_facet_pairs(
    p: &OrbitProblem,
    poly: &Polytope,
    dim_z: usize,
    opts: &PairOptions,
) -> Result<(Vec<RessayrePair>, Vec<FacetOutcome>)> {
    let p = &real(p);
    let probes: Vec<Result<_>> =
        (0..poly.halfspaces.len()).into_par_iter().map(|i| probe_facet(p, poly, i, opts)).collect();
    let mut pairs: Vec<RessayrePair> = Vec::new();
    let mut outcomes = Vec::new();
    for (i, probe) in probes.into_iter().enumerate() {
        let h = &poly.halfspaces[i];
        let wall = wall_of(p, poly, &h.normal, h.offset, opts.wall_tol).is_some();
        let mut out = FacetOutcome {
            facet: i,
            normal: h.normal.clone(),
            offset: h.offset,
            wall,
            gamma: None,
            pair: None,
            note: None,
        };
        match probe {
            Ok((g, c, note)) => {
                out.gamma = g;
                out.note = note;
                if let Some(c) = c {
                    let idx = match pairs.iter().position(|q| q.component == c) {
                        Some(j) => j,
                        None => {
                            pairs.push(build_pair(p, &c, Provenance::Facet, dim_z, opts)?);
                            pairs.len() - 1
                        }
                    };
                    out.pair = Some(idx);
                }
            }
            Err(e) => out.note = Some(e.to_string()),
        }
        outcomes.push(out);
    }
    Ok((pairs, outcomes))
}

/// Rational approximation of a real direction, merging nearly equal
/// coordinates first so the block structure is preserved.
fn snap_gamma(g: &[f64]) -> Option<RationalVector> {
    let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let tol = 1e-6 * scale;
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g[a].total_cmp(&g[b]));
    let mut snapped = g.to_vec();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && g[order[end]] - g[order[end - 1]] <= tol {
            end += 1;
        }
        let mean = order[start..end].iter().map(|&i| g[i]).sum::<f64>() / (end - start) as f64;
        for &i in &order[start..end] {
            snapped[i] = mean;
        }
        start = end;
    }
    let coords = snapped.iter().map(|x| approximate(x / scale, 1_000_000)).collect::<Option<Vec<_>>>()?;
    Some(RationalVector::new(coords))
}

/// Pair from the projection of an exterior point `ξ` onto the polytope. When
/// `poly` is given, points inside it are rejected up front.
pub fn generate_projection_pair(
    p: &OrbitProblem,
    poly: Option<&Polytope>,
    xi: &[f64],
    dim_z: usize,
    opts: &PairOptions,
) -> Result<(RessayrePair, ShiftedFlow)> {
    let p = &real(p);
    if let Some(poly) = poly {
        if membership(poly, xi, 1e-9 * p.scale()).0 {
            return Err(Error::invalid("ξ lies inside the polytope"));
        }
    }
    let sf = run_probe(p, xi, opts)?;
    if sf.dist <= 1e-6 * p.scale() {
        return Err(Error::invalid("ξ lies inside the polytope"));
    }
    let g = snap_gamma(&sf.gamma).ok_or_else(|| Error::numeric("γ could not be rationalized", sf.dist))?;
    let (_, c, _) = bb_limit(p, &sf.rotated, &g, &BbControls::default())?;
    let pair = build_pair(p, &c, Provenance::Projection, dim_z, opts)?;
    Ok((pair, sf))
}

/// Cross-check family: every `±` indicator vector of a proper nonempty subset
/// of coordinates, with its best passing component.
pub fn exhaustive_pairs(p: &OrbitProblem, dim_z: usize, opts: &PairOptions) -> Result<Vec<RessayrePair>> {
    let p = &real(p);
    if p.n > 16 {
        return Err(Error::ResourceLimit("exhaustive mode is limited to n ≤ 16".into()));
    }
    let mut gammas = Vec::new();
    for mask in 1u32..((1u32 << p.n) - 1) {
        let ind: Vec<i64> = (0..p.n).map(|i| (mask >> i & 1) as i64).collect();
        gammas.push(RationalVector::from_ints(&ind));
        gammas.push(RationalVector::from_ints(&ind.iter().map(|x| -x).collect::<Vec<_>>()));
    }
    let found: Vec<Result<Option<RessayrePair>>> = gammas
        .par_iter()
        .map(|g| {
            best_pair_component(p, g, opts)?.map(|c| build_pair(p, &c, Provenance::Exhaustive, dim_z, opts)).transpose()
        })
        .collect();
    found.into_iter().filter_map(Result::transpose).collect()
}
