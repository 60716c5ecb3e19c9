use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::hull::hull_from_points;
use super::project::min_norm_point;
use super::Halfspace;
use crate::error::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A polyhedron `{x : ⟨x, n⟩ ≥ c for halfspaces, ⟨x, n⟩ = c for equalities}`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct HRep {
    pub ambient_dim: usize,
    pub halfspaces: Vec<Halfspace>,
    pub equalities: Vec<Halfspace>,
}

/// Vertices of a bounded H-representation.
#[derive(Debug, Clone)]
pub struct RegionVertices {
    pub vertices: Vec<Vec<f64>>,
    pub bounded: bool,
}

impl HRep {
    pub fn new(ambient_dim: usize) -> Self {
        HRep { ambient_dim, ..Default::default() }
    }

    pub fn intersect(&self, other: &HRep) -> HRep {
        let mut out = self.clone();
        out.halfspaces.extend(other.halfspaces.iter().cloned());
        out.equalities.extend(other.equalities.iter().cloned());
        out
    }

    /// Signed maximal violation over all constraints; `≤ 0` means feasible
    /// for inequalities (equalities contribute their absolute residual).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let ineq = self.halfspaces.iter().map(|h| h.offset - dot(&h.normal, x));
        let eq = self.equalities.iter().map(|h| (dot(&h.normal, x) - h.offset).abs());
        ineq.chain(eq).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        self.halfspaces.iter().map(|h| dot(&h.normal, x) - h.offset).collect()
    }

    /// Enumerates vertices by solving every square subsystem of active
    /// constraints, inside a box of half-width `bound` used to detect
    /// unboundedness.
    pub fn vertices(&self, bound: f64) -> Result<RegionVertices> {
        let d = self.ambient_dim;
        let tol = 1e-9;

        let (x0, null) = if self.equalities.is_empty() {
            (vec![0.0; d], DMatrix::<f64>::identity(d, d))
        } else {
            let q = self.equalities.len();
            let e = DMatrix::from_fn(q, d, |i, j| self.equalities[i].normal[j]);
            let b = DVector::from_iterator(q, self.equalities.iter().map(|h| h.offset));
            let svd = e.clone().svd(true, true);
            let x0 = svd.solve(&b, 1e-12).map_err(|m| Error::numeric(format!("equality solve: {m}"), 0.0))?;
            if (&e * &x0 - &b).amax() > 1e-8 {
                return Ok(RegionVertices { vertices: Vec::new(), bounded: true });
            }
            // null space from the full SVD of EᵀE
            let gram = e.transpose() * &e;
            let eig = gram.symmetric_eigen();
            let cols: Vec<DVector<f64>> = (0..d)
                .filter(|&k| eig.eigenvalues[k].abs() < 1e-10)
                .map(|k| eig.eigenvectors.column(k).clone_owned())
                .collect();
            let null = if cols.is_empty() { DMatrix::zeros(d, 0) } else { DMatrix::from_columns(&cols) };
            (x0.iter().copied().collect(), null)
        };
        let p = null.ncols();
        let lift = |z: &DVector<f64>| -> Vec<f64> {
            let x = &null * z;
            x.iter().zip(&x0).map(|(a, b)| a + b).collect()
        };

        // constraints a·z ≥ c in null-space coordinates
        let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new();
        for h in &self.halfspaces {
            let a: Vec<f64> = (0..p).map(|k| (0..d).map(|j| null[(j, k)] * h.normal[j]).sum()).collect();
            let c = h.offset - dot(&h.normal, &x0);
            if a.iter().all(|x| x.abs() < 1e-12) {
                if c > tol {
                    return Ok(RegionVertices { vertices: Vec::new(), bounded: true });
                }
                continue;
            }
            rows.push((a, c, false));
        }
        for k in 0..p {
            let mut e = vec![0.0; p];
            e[k] = 1.0;
            rows.push((e.clone(), -bound, true));
            e[k] = -1.0;
            rows.push((e, -bound, true));
        }
        if p == 0 {
            let z = DVector::zeros(0);
            return Ok(RegionVertices { vertices: vec![lift(&z)], bounded: true });
        }

        let m = rows.len();
        let mut verts: Vec<Vec<f64>> = Vec::new();
        let mut bounded = true;
        let mut combo: Vec<usize> = (0..p).collect();
        loop {
            let a = DMatrix::from_fn(p, p, |i, j| rows[combo[i]].0[j]);
            let c = DVector::from_iterator(p, combo.iter().map(|&i| rows[i].1));
            if let Some(z) = a.lu().solve(&c) {
                let feasible = rows.iter().all(|(r, off, _)| {
                    r.iter().zip(z.iter()).map(|(x, y)| x * y).sum::<f64>() >= off - tol * (1.0 + off.abs())
                });
                if feasible {
                    let x = lift(&z);
                    if !verts.iter().any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-8)) {
                        if combo.iter().any(|&i| rows[i].2) {
                            bounded = false;
                        }
                        verts.push(x);
                    }
                }
            }
            // next combination
            let mut i = p;
            while i > 0 && combo[i - 1] == m - p + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..p {
                combo[j] = combo[j - 1] + 1;
            }
        }
        Ok(RegionVertices { vertices: verts, bounded })
    }
}

/// Soundness, tightness and Hausdorff comparison between an H-region and a
/// sampled point cloud.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// Max over the cloud of the maximal constraint violation.
    pub soundness_violation: f64,
    /// Per halfspace, the minimal slack achieved by the cloud.
    pub facet_min_slack: Vec<f64>,
    /// Hausdorff distance between `hull(cloud)` and the region; infinite when
    /// the region is unbounded or empty.
    pub hausdorff: f64,
    pub region_bounded: bool,
    pub region_vertices: Vec<Vec<f64>>,
    pub hull_vertices: Vec<Vec<f64>>,
}

pub fn hausdorff_vrep(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.par_iter().map(|v| min_norm_point(to, v).dist).reduce(|| 0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

pub fn compare_regions(region: &HRep, cloud: &[Vec<f64>], hull_tol: f64) -> Result<ComparisonReport> {
    if cloud.is_empty() {
        return Err(Error::invalid("empty cloud"));
    }
    if cloud.iter().any(|p| p.len() != region.ambient_dim) {
        return Err(Error::invalid("cloud and region have different dimensions"));
    }
    let soundness_violation = cloud.par_iter().map(|x| region.max_violation(x)).reduce(|| f64::NEG_INFINITY, f64::max);
    let facet_min_slack = cloud.par_iter().map(|x| region.slacks(x)).reduce(
        || vec![f64::INFINITY; region.halfspaces.len()],
        |a, b| a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect(),
    );
    let hull = hull_from_points(cloud, hull_tol)?;
    let scale = cloud.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
    let rv = region.vertices(1e4 * scale)?;
    let hausdorff = if rv.bounded && !rv.vertices.is_empty() {
        hausdorff_vrep(&hull.vertices, &rv.vertices)
    } else {
        f64::INFINITY
    };
    Ok(ComparisonReport {
        soundness_violation,
        facet_min_slack,
        hausdorff,
        region_bounded: rv.bounded,
        region_vertices: rv.vertices,
        hull_vertices: hull.vertices,
    })
}
