//! Incremental convex hull in the affine hull of the input, lifted back to
//! ambient coordinates.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::affine::affine_hull_basis;
use super::{Halfspace, Polytope};
use crate::error::{Error, Result};

struct Facet {
    verts: Vec<usize>,
    normal: Vec<f64>,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        1.0
    } else {
        m.determinant()
    }
}

/// Outward unit normal and offset of the hyperplane through `verts`, oriented
/// away from `interior`.
fn plane(pts: &[Vec<f64>], verts: &[usize], interior: &[f64]) -> Option<(Vec<f64>, f64)> {
    let r = interior.len();
    let p0 = &pts[verts[0]];
    let diffs = DMatrix::from_fn(r - 1, r, |i, j| pts[verts[i + 1]][j] - p0[j]);
    let mut n: Vec<f64> = (0..r)
        .map(|k| {
            let minor = diffs.clone().remove_column(k);
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            s * det(&minor)
        })
        .collect();
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return None;
    }
    n.iter_mut().for_each(|x| *x /= norm);
    let mut c = dot(&n, p0);
    if dot(&n, interior) > c {
        n.iter_mut().for_each(|x| *x = -*x);
        c = -c;
    }
    Some((n, c))
}

fn ridge_key(verts: &[usize], skip: usize) -> Vec<usize> {
    let mut k: Vec<usize> = verts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
    k.sort_unstable();
    k
}

/// Picks `r+1` affinely independent points, greedily maximizing spread.
fn initial_simplex(pts: &[Vec<f64>], r: usize) -> Result<Vec<usize>> {
    let i0 = (0..pts.len()).min_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0])).unwrap();
    let mut chosen = vec![i0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while chosen.len() <= r {
        let residual = |p: &[f64]| -> Vec<f64> {
            let mut v: Vec<f64> = p.iter().zip(&pts[i0]).map(|(a, b)| a - b).collect();
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            v
        };
        let (best, dist) = (0..pts.len())
            .map(|i| (i, residual(&pts[i]).iter().map(|x| x * x).sum::<f64>()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if dist.sqrt() < 1e-12 {
            return Err(Error::numeric("hull: degenerate initial simplex", dist.sqrt()));
        }
        let mut v = residual(&pts[best]);
        let nv = dist.sqrt();
        v.iter_mut().for_each(|x| *x /= nv);
        basis.push(v);
        chosen.push(best);
    }
    Ok(chosen)
}

/// Local hull of full-dimensional points in `ℝ^r`, `r ≥ 2`. Returns facets as
/// `(outward normal, offset, vertex indices)` with `⟨n, y⟩ ≤ offset` inside.
fn local_hull(pts: &[Vec<f64>], r: usize) -> Result<Vec<(Vec<f64>, f64, Vec<usize>)>> {
    let scale = pts.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let eps = 1e-11 * scale;
    let simplex = initial_simplex(pts, r)?;
    let interior: Vec<f64> = (0..r).map(|j| simplex.iter().map(|&i| pts[i][j]).sum::<f64>() / (r + 1) as f64).collect();

    let mut facets: Vec<Facet> = Vec::new();
    let mut ridges: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let add_facet =
        |facets: &mut Vec<Facet>, ridges: &mut HashMap<Vec<usize>, Vec<usize>>, verts: Vec<usize>| -> Option<usize> {
            let (normal, offset) = plane(pts, &verts, &interior)?;
            let id = facets.len();
            for skip in 0..verts.len() {
                ridges.entry(ridge_key(&verts, skip)).or_default().push(id);
            }
            facets.push(Facet { verts, normal, offset, outside: Vec::new(), alive: true });
            Some(id)
        };
    for skip in 0..=r {
        let verts: Vec<usize> = simplex.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
        add_facet(&mut facets, &mut ridges, verts).ok_or_else(|| Error::numeric("hull: flat initial facet", 0.0))?;
    }
    for (i, p) in pts.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        if let Some(f) = facets.iter_mut().find(|f| dot(&f.normal, p) - f.offset > eps) {
            f.outside.push(i);
        }
    }

    let mut pending: Vec<usize> = (0..facets.len()).collect();
    while let Some(fid) = pending.pop() {
        if !facets[fid].alive || facets[fid].outside.is_empty() {
            continue;
        }
        let apex = {
            let f = &facets[fid];
            *f.outside.iter().max_by(|&&a, &&b| (dot(&f.normal, &pts[a])).total_cmp(&dot(&f.normal, &pts[b]))).unwrap()
        };
        let p = &pts[apex];

        let mut visible = vec![fid];
        let mut is_visible: HashMap<usize, bool> = HashMap::from([(fid, true)]);
        let mut stack = vec![fid];
        while let Some(f) = stack.pop() {
            for skip in 0..r {
                let key = ridge_key(&facets[f].verts, skip);
                for &g in &ridges[&key] {
                    if g == f || is_visible.contains_key(&g) {
                        continue;
                    }
                    let vis = dot(&facets[g].normal, p) - facets[g].offset > eps;
                    is_visible.insert(g, vis);
                    if vis {
                        visible.push(g);
                        stack.push(g);
                    }
                }
            }
        }

        let mut horizon = Vec::new();
        for &f in &visible {
            for skip in 0..r {
                let key = ridge_key(&facets[f].verts, skip);
                let other = ridges[&key].iter().copied().find(|&g| g != f);
                if let Some(g) = other {
                    if !is_visible.get(&g).copied().unwrap_or(false) {
                        horizon.push(key);
                    }
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            facets[f].alive = false;
            orphans.append(&mut facets[f].outside);
            for skip in 0..r {
                let key = ridge_key(&facets[f].verts, skip);
                if let Some(list) = ridges.get_mut(&key) {
                    list.retain(|&g| g != f);
                    if list.is_empty() {
                        ridges.remove(&key);
                    }
                }
            }
        }

        let mut created = Vec::new();
        for ridge in horizon {
            let mut verts = ridge;
            verts.push(apex);
            if let Some(id) = add_facet(&mut facets, &mut ridges, verts) {
                created.push(id);
            }
        }
        for q in orphans {
            if q == apex {
                continue;
            }
            if let Some(&f) = created.iter().find(|&&f| dot(&facets[f].normal, &pts[q]) - facets[f].offset > eps) {
                facets[f].outside.push(q);
            }
        }
        pending.extend(created);
    }

    Ok(facets.into_iter().filter(|f| f.alive).map(|f| (f.normal, f.offset, f.verts)).collect())
}

/// Convex hull of a point cloud. The affine hull is detected first with
/// singular-value threshold `tol`; facets are computed inside it and lifted.
pub fn hull_from_points(points: &[Vec<f64>], tol: f64) -> Result<Polytope> {
    let aff = affine_hull_basis(points, tol, None)?;
    let d = aff.basepoint.len();
    let r = aff.dim();
    let equalities: Vec<Halfspace> =
        aff.normals.iter().map(|n| Halfspace { normal: n.clone(), offset: dot(n, &aff.basepoint) }).collect();
    let local: Vec<Vec<f64>> = points.iter().map(|p| aff.local(p)).collect();

    let (mut halfspaces, mut facet_vertices, vertex_ids): (Vec<Halfspace>, Vec<Vec<usize>>, Vec<usize>) = match r {
        0 => (Vec::new(), Vec::new(), vec![0]),
        1 => {
            let lo = (0..local.len()).min_by(|&a, &b| local[a][0].total_cmp(&local[b][0])).unwrap();
            let hi = (0..local.len()).max_by(|&a, &b| local[a][0].total_cmp(&local[b][0])).unwrap();
            let u = &aff.direction[0];
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            let hs = vec![
                Halfspace { normal: u.clone(), offset: dot(u, &points[lo]) },
                Halfspace { normal: neg.clone(), offset: dot(&neg, &points[hi]) },
            ];
            (hs, vec![vec![lo], vec![hi]], vec![lo, hi])
        }
        _ => {
            let facets = local_hull(&local, r)?;
            let groups = merge_coplanar(facets, 1e-9);
            let mut hs = Vec::new();
            let mut fv = Vec::new();
            for (n, c, verts) in groups {
                // inward normal in ambient coordinates
                let amb: Vec<f64> =
                    (0..d).map(|j| -aff.direction.iter().zip(&n).map(|(b, ni)| b[j] * ni).sum::<f64>()).collect();
                hs.push(Halfspace { offset: -c + dot(&amb, &aff.basepoint), normal: amb });
                fv.push(verts);
            }
            let ids = extreme_vertices(&local, &fv, &hs, &aff, r);
            (hs, fv, ids)
        }
    };

    let vertices: Vec<Vec<f64>> = vertex_ids.iter().map(|&i| points[i].clone()).collect();
    let remap: HashMap<usize, usize> = vertex_ids.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    for fv in facet_vertices.iter_mut() {
        *fv = fv.iter().filter_map(|i| remap.get(i).copied()).collect();
    }
    halfspaces.iter_mut().for_each(|h| h.normalize());
    Ok(Polytope {
        ambient_dim: d,
        vertices,
        halfspaces,
        equalities,
        facet_vertices,
        affine_basepoint: aff.basepoint.clone(),
        affine_basis: aff.direction.clone(),
        normal_basis: aff.normals.clone(),
    })
}

fn merge_coplanar(facets: Vec<(Vec<f64>, f64, Vec<usize>)>, tol: f64) -> Vec<(Vec<f64>, f64, Vec<usize>)> {
    let mut groups: Vec<(Vec<f64>, f64, Vec<usize>)> = Vec::new();
    for (n, c, verts) in facets {
        let hit = groups.iter_mut().find(|(m, e, _)| {
            (c - *e).abs() <= tol * (1.0 + c.abs()) && n.iter().zip(m.iter()).all(|(a, b)| (a - b).abs() <= tol)
        });
        match hit {
            Some((_, _, vs)) => {
                for v in verts {
                    if !vs.contains(&v) {
                        vs.push(v);
                    }
                }
            }
            None => groups.push((n, c, verts)),
        }
    }
    for g in groups.iter_mut() {
        g.2.sort_unstable();
    }
    groups
}

/// Keeps vertices whose incident facet normals span the local space.
fn extreme_vertices(
    _local: &[Vec<f64>],
    facet_vertices: &[Vec<usize>],
    halfspaces: &[Halfspace],
    aff: &super::affine::AffineHull,
    r: usize,
) -> Vec<usize> {
    let mut candidates: Vec<usize> = facet_vertices.iter().flatten().copied().collect();
    candidates.sort_unstable();
    candidates.dedup();
    candidates
        .into_iter()
        .filter(|&v| {
            let normals: Vec<Vec<f64>> = facet_vertices
                .iter()
                .zip(halfspaces)
                .filter(|(fv, _)| fv.contains(&v))
                .map(|(_, h)| aff.direction.iter().map(|b| dot(b, &h.normal)).collect())
                .collect();
            if normals.len() < r {
                return false;
            }
            let m = DMatrix::from_fn(normals.len(), r, |i, j| normals[i][j]);
            crate::linalg::numeric_rank(&m, 1e-9) == r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle() {
        let p = hull_from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.2, 0.2]], 1e-9).unwrap();
        assert_eq!(p.halfspaces.len(), 3);
        assert_eq!(p.vertices.len(), 3);
        assert!(p.equalities.is_empty());
    }

    #[test]
    fn segment() {
        let p = hull_from_points(&[vec![1.0, 1.0], vec![2.0, 0.0], vec![1.5, 0.5]], 1e-9).unwrap();
        assert_eq!(p.affine_basis.len(), 1);
        assert_eq!(p.vertices.len(), 2);
        assert_eq!(p.halfspaces.len(), 2);
        let n = &p.normal_basis[0];
        assert!((n[0] - n[1]).abs() < 1e-12 && (n[0].abs() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cube_faces_merge() {
        let mut pts = Vec::new();
        for mask in 0..8u32 {
            pts.push((0..3).map(|i| f64::from(mask >> i & 1)).collect::<Vec<f64>>());
        }
        pts.push(vec![0.5, 0.5, 0.0]);
        pts.push(vec![0.5, 0.5, 0.5]);
        let p = hull_from_points(&pts, 1e-9).unwrap();
        assert_eq!(p.halfspaces.len(), 6);
        assert_eq!(p.vertices.len(), 8);
    }

    #[test]
    fn collinear_insertion_is_not_a_vertex() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0], vec![2.0, 0.0]];
        let p = hull_from_points(&pts, 1e-9).unwrap();
        assert_eq!(p.vertices.len(), 3);
        assert_eq!(p.halfspaces.len(), 3);
    }
}
