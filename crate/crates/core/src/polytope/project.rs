//! Wolfe's minimum-norm-point algorithm over a V-representation.

use nalgebra::{DMatrix, DVector};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of a nearest-point query.
#[derive(Debug, Clone)]
pub struct Projection {
    pub point: Vec<f64>,
    pub dist: f64,
    /// Convex weights on the input vertices (sparse: vertex index, weight).
    pub weights: Vec<(usize, f64)>,
}

/// Minimizer of `‖Σ α_i p_i‖` over the affine hull of `ps[s]`.
fn affine_minimizer(ps: &[Vec<f64>], s: &[usize]) -> Option<Vec<f64>> {
    let m = s.len();
    let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
    for (a, &i) in s.iter().enumerate() {
        for (b, &j) in s.iter().enumerate() {
            kkt[(a, b)] = dot(&ps[i], &ps[j]);
        }
        kkt[(a, m)] = 1.0;
        kkt[(m, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let sol = kkt.clone().lu().solve(&rhs).or_else(|| {
        // near-singular: fall back to least squares
        kkt.svd(true, true).solve(&rhs, 1e-14).ok()
    })?;
    Some(sol.iter().take(m).copied().collect())
}

fn combine(ps: &[Vec<f64>], s: &[usize], w: &[f64]) -> Vec<f64> {
    let d = ps[0].len();
    let mut x = vec![0.0; d];
    for (&i, &wi) in s.iter().zip(w) {
        for (xj, pj) in x.iter_mut().zip(&ps[i]) {
            *xj += wi * pj;
        }
    }
    x
}

/// Nearest point of `conv(vertices)` to `xi`.
pub fn min_norm_point(vertices: &[Vec<f64>], xi: &[f64]) -> Projection {
    assert!(!vertices.is_empty(), "empty vertex set");
    let ps: Vec<Vec<f64>> = vertices.iter().map(|v| v.iter().zip(xi).map(|(a, b)| a - b).collect()).collect();
    let scale = ps.iter().map(|p| dot(p, p)).fold(0.0f64, f64::max).max(1e-300);
    let eps = 1e-14 * scale;

    let start = (0..ps.len()).min_by(|&a, &b| dot(&ps[a], &ps[a]).total_cmp(&dot(&ps[b], &ps[b]))).unwrap();
    let mut s = vec![start];
    let mut w = vec![1.0];
    let mut x = ps[start].clone();

    for _ in 0..(50 * ps.len() + 100) {
        let xx = dot(&x, &x);
        let j = (0..ps.len()).min_by(|&a, &b| dot(&x, &ps[a]).total_cmp(&dot(&x, &ps[b]))).unwrap();
        if dot(&x, &ps[j]) >= xx - eps || s.contains(&j) {
            break;
        }
        s.push(j);
        w.push(0.0);
        loop {
            let Some(alpha) = affine_minimizer(&ps, &s) else {
                break;
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                w = alpha;
                break;
            }
            let theta = s
                .iter()
                .enumerate()
                .filter(|&(k, _)| alpha[k] <= 1e-15)
                .map(|(k, _)| w[k] / (w[k] - alpha[k]))
                .fold(1.0f64, f64::min)
                .clamp(0.0, 1.0);
            for k in 0..s.len() {
                w[k] = (1.0 - theta) * w[k] + theta * alpha[k];
            }
            let keep: Vec<usize> = (0..s.len()).filter(|&k| w[k] > 1e-15).collect();
            s = keep.iter().map(|&k| s[k]).collect();
            w = keep.iter().map(|&k| w[k]).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
        }
        x = combine(&ps, &s, &w);
    }

    let point: Vec<f64> = x.iter().zip(xi).map(|(a, b)| a + b).collect();
    Projection { dist: dot(&x, &x).sqrt(), point, weights: s.into_iter().zip(w).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_projection() {
        let seg = [vec![1.0, 1.0], vec![2.0, 0.0]];
        let p = min_norm_point(&seg, &[3.0, -1.0]);
        assert!((p.point[0] - 2.0).abs() < 1e-12 && p.point[1].abs() < 1e-12);
        assert!((p.dist - 2f64.sqrt()).abs() < 1e-12);
        let p = min_norm_point(&seg, &[1.5, 0.5]);
        assert!(p.dist < 1e-12);
    }

    #[test]
    fn triangle_hypotenuse() {
        let tri = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = min_norm_point(&tri, &[1.0, 1.0]);
        assert!((p.point[0] - 0.5).abs() < 1e-12 && (p.point[1] - 0.5).abs() < 1e-12);
        let p = min_norm_point(&tri, &[0.2, 0.3]);
        assert!(p.dist < 1e-12);
    }
}
