use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{rationalize_direction, RationalVector};

/// Affine hull of a point cloud inside a linear subspace `ℝs`.
#[derive(Debug, Clone)]
pub struct AffineHull {
    pub basepoint: Vec<f64>,
    /// Orthonormal basis of the direction space `Π⃗`.
    pub direction: Vec<Vec<f64>>,
    /// Orthonormal basis of `Π⃗⊥` inside `ℝs`.
    pub normals: Vec<Vec<f64>>,
    /// Rational basis of `Π⃗⊥` (reduced echelon form, primitive integer rows);
    /// `None` where reconstruction failed the residual check.
    pub rational_normals: Vec<Option<RationalVector>>,
}

impl AffineHull {
    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// Coordinates of `x − basepoint` in the direction basis.
    pub fn local(&self, x: &[f64]) -> Vec<f64> {
        self.direction
            .iter()
            .map(|b| b.iter().zip(x).zip(&self.basepoint).map(|((bi, xi), pi)| bi * (xi - pi)).sum())
            .collect()
    }

    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.basepoint.clone();
        for (b, yi) in self.direction.iter().zip(y) {
            for (xj, bj) in x.iter_mut().zip(b) {
                *xj += yi * bj;
            }
        }
        x
    }
}

pub const DEFAULT_MAX_DEN: u64 = 64;
pub const RATIONAL_RESIDUAL: f64 = 1e-6;

/// Affine hull by eigen-decomposition of the scatter matrix inside the
/// subspace spanned by the orthonormal rows of `subspace` (ambient space when
/// `None`). Directions along which no point deviates by more than `tol` are
/// normal directions.
pub fn affine_hull_basis(points: &[Vec<f64>], tol: f64, subspace: Option<&[Vec<f64>]>) -> Result<AffineHull> {
    let first = points.first().ok_or_else(|| Error::invalid("empty point set"))?;
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("points have mixed dimensions"));
    }
    let m = points.len() as f64;
    let mut base = vec![0.0; d];
    for p in points {
        for (b, x) in base.iter_mut().zip(p) {
            *b += x / m;
        }
    }
    let sub: Vec<Vec<f64>> = match subspace {
        Some(s) => s.to_vec(),
        None => (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect(),
    };
    let s = sub.len();
    let sub_m = DMatrix::from_fn(s, d, |i, j| sub[i][j]);

    let mut scatter = DMatrix::<f64>::zeros(s, s);
    for p in points {
        let c = DVector::from_iterator(d, p.iter().zip(&base).map(|(x, b)| x - b));
        let y = &sub_m * c;
        scatter += &y * y.transpose();
    }
    scatter /= m;
    let eig = scatter.symmetric_eigen();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let lift = |k: usize| -> Vec<f64> {
        let v = eig.eigenvectors.column(k);
        let x = sub_m.transpose() * v;
        x.iter().copied().collect()
    };
    let mut direction = Vec::new();
    let mut normals = Vec::new();
    // extent measured on the points: the scatter eigenvalues carry
    // roundoff near sqrt(eps) after the square root
    let extent = |v: &[f64]| -> f64 {
        points
            .iter()
            .map(|p| p.iter().zip(&base).zip(v).map(|((x, b), vi)| (x - b) * vi).sum::<f64>().abs())
            .fold(0.0, f64::max)
    };
    for &k in &order {
        if extent(&lift(k)) > tol {
            direction.push(lift(k));
        } else {
            normals.push(lift(k));
        }
    }
    let rational_normals = rational_basis(&normals, DEFAULT_MAX_DEN, RATIONAL_RESIDUAL);
    Ok(AffineHull { basepoint: base, direction, normals, rational_normals })
}

/// Canonical rational basis of `span(vectors)`: reduced row echelon form of the
/// float basis, each row rationalized by continued fractions.
pub fn rational_basis(vectors: &[Vec<f64>], max_den: u64, tol: f64) -> Vec<Option<RationalVector>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let d = vectors[0].len();
    let mut rows: Vec<Vec<f64>> = vectors.to_vec();
    let mut r = 0;
    for c in 0..d {
        if r == rows.len() {
            break;
        }
        let p = (r..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())).unwrap();
        if rows[p][c].abs() < 1e-9 {
            continue;
        }
        rows.swap(r, p);
        let piv = rows[r][c];
        for x in rows[r].iter_mut() {
            *x /= piv;
        }
        for i in 0..rows.len() {
            if i != r {
                let f = rows[i][c];
                for j in 0..d {
                    rows[i][j] -= f * rows[r][j];
                }
            }
        }
        r += 1;
    }
    rows.iter().map(|row| rationalize_direction(row, max_den, tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_normal_is_trace_direction() {
        let h = affine_hull_basis(&[vec![1.0, 1.0], vec![2.0, 0.0]], 1e-9, None).unwrap();
        assert_eq!(h.dim(), 1);
        let n = &h.normals[0];
        let s = 1.0 / 2f64.sqrt();
        assert!((n[0].abs() - s).abs() < 1e-12 && (n[1].abs() - s).abs() < 1e-12);
        assert_eq!(h.rational_normals, vec![Some(RationalVector::from_ints(&[1, 1]))]);
    }

    #[test]
    fn single_point_and_full_cloud() {
        let h = affine_hull_basis(&[vec![3.0, 1.0]], 1e-9, None).unwrap();
        assert_eq!(h.dim(), 0);
        let mut r: Vec<_> = h.rational_normals.into_iter().map(Option::unwrap).collect();
        r.sort();
        assert_eq!(r, vec![RationalVector::from_ints(&[0, 1]), RationalVector::from_ints(&[1, 0])]);

        let tri = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let h = affine_hull_basis(&tri, 1e-9, None).unwrap();
        assert_eq!(h.dim(), 2);
        assert!(h.normals.is_empty());
    }

    #[test]
    fn subspace_restriction() {
        // points in the plane x+y+z = 3, hull of a segment, inside ℝs = trace-free + (1,1,1)
        let pts = [vec![2.0, 1.0, 0.0], vec![1.0, 1.0, 1.0]];
        let h = affine_hull_basis(&pts, 1e-9, None).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.normals.len(), 2);
        assert!(h.rational_normals.iter().all(Option::is_some));
        let y = h.local(&pts[0]);
        let back = h.lift(&y);
        assert!(back.iter().zip(&pts[0]).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
