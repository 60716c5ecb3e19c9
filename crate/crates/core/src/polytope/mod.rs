//! Convex geometry on moment images: affine hulls, hulls of sample clouds,
//! membership, nearest-point projection and region comparison.

mod affine;
mod hrep;
mod hull;
mod project;

use serde::{Deserialize, Serialize};

pub use affine::{affine_hull_basis, rational_basis, AffineHull, DEFAULT_MAX_DEN, RATIONAL_RESIDUAL};
pub use hrep::{compare_regions, hausdorff_vrep, ComparisonReport, HRep, RegionVertices};
pub use hull::hull_from_points;
pub use project::{min_norm_point, Projection};

/// `⟨x, normal⟩ ≥ offset` (or `=` when used as an equality).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn normalize(&mut self) {
        let n = self.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            self.normal.iter_mut().for_each(|x| *x /= n);
            self.offset /= n;
        }
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }
}

/// A bounded convex polytope with both representations and affine-hull data.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub ambient_dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub halfspaces: Vec<Halfspace>,
    pub equalities: Vec<Halfspace>,
    /// For each halfspace, the indices of the vertices lying on it.
    pub facet_vertices: Vec<Vec<usize>>,
    pub affine_basepoint: Vec<f64>,
    pub affine_basis: Vec<Vec<f64>>,
    pub normal_basis: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct PolytopeJson<'a> {
    ambient_dim: usize,
    vertices: &'a [Vec<f64>],
    halfspaces: &'a [Halfspace],
    equalities: &'a [Halfspace],
}

impl Serialize for Polytope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolytopeJson {
            ambient_dim: self.ambient_dim,
            vertices: &self.vertices,
            halfspaces: &self.halfspaces,
            equalities: &self.equalities,
        }
        .serialize(s)
    }
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.affine_basis.len()
    }

    pub fn hrep(&self) -> HRep {
        HRep { ambient_dim: self.ambient_dim, halfspaces: self.halfspaces.clone(), equalities: self.equalities.clone() }
    }

    /// Centroid of the vertices of facet `i`.
    pub fn facet_center(&self, i: usize) -> Vec<f64> {
        let vs = &self.facet_vertices[i];
        let mut c = vec![0.0; self.ambient_dim];
        for &v in vs {
            for (cj, x) in c.iter_mut().zip(&self.vertices[v]) {
                *cj += x / vs.len() as f64;
            }
        }
        c
    }
}

/// `(inside, max_violation)`: inside iff every constraint is violated by at most `tol`.
pub fn membership(p: &Polytope, xi: &[f64], tol: f64) -> (bool, f64) {
    let v = p.hrep().max_violation(xi);
    (v <= tol, v)
}

/// Nearest point of the polytope to `xi` and the distance to it.
pub fn project_point(p: &Polytope, xi: &[f64]) -> (Vec<f64>, f64) {
    let pr = min_norm_point(&p.vertices, xi);
    (pr.point, pr.dist)
}
