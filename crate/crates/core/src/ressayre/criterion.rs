use nalgebra::DMatrix;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::Result;
use crate::lie::RationalVector;
use crate::linalg::{eigh_ascending, numeric_rank, singular_values};
use crate::orbit::{
    component_point, fixed_components, sample, stabilizer_p_dim, tangent_action, ComponentDescriptor, OrbitProblem,
    RealPoint,
};

/// Graded pieces of `ρ_x^γ : 𝔫^{γ>0} → (T_x Z)^{γ>0}` at a block point `x`.
#[derive(Debug, Clone, Serialize)]
pub struct WeightDecomposition {
    /// `E_ij` with `i < j` and `γ_i > γ_j` (0-based).
    pub n_basis: Vec<(usize, usize)>,
    /// Positive-weight tangent directions `(factor, a, b)`: slots `a < b`
    /// (so `λ[a] > λ[b]`) in blocks with `γ(block a) > γ(block b)`.
    pub tangent_basis: Vec<(usize, usize, usize)>,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
}

/// Outcome of the rank test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankWitness {
    pub dims_matched: bool,
    pub dim_n: usize,
    pub dim_t: usize,
    /// Best numeric rank seen over the trials.
    pub rank: usize,
    /// Smallest singular value of the accepted (or last) trial.
    pub sigma_min: f64,
    pub tolerance: f64,
    pub trials_used: usize,
}

pub fn n_gamma_positive(gamma: &RationalVector) -> Vec<(usize, usize)> {
    let n = gamma.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if gamma[i] > gamma[j] {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn tangent_gamma_positive(c: &ComponentDescriptor) -> Vec<(usize, usize, usize)> {
    let vals = c.block_values();
    let mut out = Vec::new();
    for (f, assign) in c.assignments.iter().enumerate() {
        let n = assign.len();
        for a in 0..n {
            for b in (a + 1)..n {
                if vals[assign[a]] > vals[assign[b]] {
                    out.push((f, a, b));
                }
            }
        }
    }
    out
}

/// Matrix of `ρ_x^γ` at the block point `x ∈ 𝒞` in the bases above.
pub fn weight_decomposition(p: &OrbitProblem, c: &ComponentDescriptor, x: &RealPoint) -> Result<WeightDecomposition> {
    let n_basis = n_gamma_positive(&c.gamma);
    let tangent_basis = tangent_gamma_positive(c);
    // eigenvectors by slot (slot 0 = largest eigenvalue)
    let frames: Vec<DMatrix<f64>> = x
        .matrices
        .iter()
        .map(|a| {
            let (_, q) = eigh_ascending(a);
            let n = q.ncols();
            DMatrix::from_fn(n, n, |i, s| q[(i, n - 1 - s)])
        })
        .collect();
    let mut matrix = DMatrix::zeros(tangent_basis.len(), n_basis.len());
    for (col, &(i, j)) in n_basis.iter().enumerate() {
        let mut e = DMatrix::zeros(p.n, p.n);
        e[(i, j)] = 1.0;
        let t = tangent_action(p, &e, x)?;
        for (row, &(f, a, b)) in tangent_basis.iter().enumerate() {
            let va = frames[f].column(a);
            let vb = frames[f].column(b);
            matrix[(row, col)] = (va.transpose() * &t[f] * vb)[(0, 0)];
        }
    }
    Ok(WeightDecomposition { n_basis, tangent_basis, matrix })
}

/// Infinitesimal pair test: exact dimension check, then a numeric rank test
/// at up to `trials` random points of the component.
pub fn infinitesimal_pair_test(
    p: &OrbitProblem,
    c: &ComponentDescriptor,
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<(bool, RankWitness, Option<WeightDecomposition>)> {
    let dim_n = n_gamma_positive(&c.gamma).len();
    let dim_t = tangent_gamma_positive(c).len();
    let mut w = RankWitness {
        dims_matched: dim_n == dim_t,
        dim_n,
        dim_t,
        rank: 0,
        sigma_min: 0.0,
        tolerance: tol,
        trials_used: 0,
    };
    if dim_n != dim_t {
        return Ok((false, w, None));
    }
    if dim_n == 0 {
        return Ok((true, w, None));
    }
    let mut last = None;
    for t in 0..trials.max(1) {
        let x = component_point(p, c, seed.wrapping_add(t as u64))?;
        let wd = weight_decomposition(p, c, &x)?;
        let r = numeric_rank(&wd.matrix, tol);
        w.trials_used = t + 1;
        w.rank = w.rank.max(r);
        w.sigma_min = singular_values(&wd.matrix).last().copied().unwrap_or(0.0);
        last = Some(wd);
        if r == dim_n {
            return Ok((true, w, last));
        }
    }
    Ok((false, w, last))
}

/// Sampled stabilizer dimensions: `dim_p(Z)`, `dim_p(Z^γ)` and, when a
/// component is given, `dim_p(𝒞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub dim_z: usize,
    pub dim_z_gamma: usize,
}

fn min_dim(p: &OrbitProblem, pts: impl Iterator<Item = Result<RealPoint>>, tol: f64) -> Result<usize> {
    let mut best = usize::MAX;
    for z in pts {
        best = best.min(stabilizer_p_dim(p, &z?, tol)?);
    }
    Ok(best)
}

pub fn dim_p_z(p: &OrbitProblem, budget: usize, tol: f64, seed: u64) -> Result<usize> {
    let real = p.with_mode(crate::orbit::Mode::Real);
    min_dim(&real, sample::<f64>(&real, seed, budget.max(1)).into_iter().map(Ok), tol)
}

pub fn dim_p_component(p: &OrbitProblem, c: &ComponentDescriptor, budget: usize, tol: f64, seed: u64) -> Result<usize> {
    min_dim(p, (0..budget.max(1) as u64).map(|t| component_point(p, c, seed.wrapping_add(t))), tol)
}

/// `γ` is admissible when `dim_p(Z^γ) − dim_p(Z) ∈ {0, 1}`; dimensions are
/// minima over `budget` samples (per component for `Z^γ`).
pub fn is_admissible(
    p: &OrbitProblem,
    gamma: &RationalVector,
    budget: usize,
    tol: f64,
    seed: u64,
    component_bound: u64,
) -> Result<Admissibility> {
    let dim_z = dim_p_z(p, budget, tol, seed)?;
    let mut dim_z_gamma = usize::MAX;
    for c in fixed_components(p, gamma, component_bound)? {
        dim_z_gamma = dim_z_gamma.min(dim_p_component(p, &c, budget, tol, seed)?);
        if dim_z_gamma <= dim_z {
            break;
        }
    }
    let admissible = dim_z_gamma >= dim_z && dim_z_gamma - dim_z <= 1;
    Ok(Admissibility { admissible, dim_z, dim_z_gamma })
}

/// Value and pair status of every component of `Z^γ`.
pub fn component_table(
    p: &OrbitProblem,
    gamma: &RationalVector,
    trials: usize,
    tol: f64,
    seed: u64,
    bound: u64,
) -> Result<Vec<(ComponentDescriptor, BigRational, bool)>> {
    let mut out = Vec::new();
    for c in fixed_components(p, gamma, bound)? {
        let v = crate::orbit::component_moment_value(p, &c)?;
        let (ok, _, _) = infinitesimal_pair_test(p, &c, trials, tol, seed)?;
        out.push((c, v, ok));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::Mode;

    fn horn2() -> OrbitProblem {
        OrbitProblem::from_ints(&[&[1, 0], &[1, 0]], Mode::Real).unwrap()
    }

    fn comp(g: &[i64], assignments: Vec<Vec<usize>>) -> ComponentDescriptor {
        let gamma = RationalVector::from_ints(g);
        let blocks = crate::orbit::fixed_components(&horn2(), &gamma, 100).unwrap()[0].blocks.clone();
        ComponentDescriptor { gamma, blocks, assignments }
    }

    #[test]
    fn horn_two_discrimination() {
        let p = horn2();
        let (ok, w, _) = infinitesimal_pair_test(&p, &comp(&[1, 0], vec![vec![0, 1], vec![1, 0]]), 8, 1e-7, 0).unwrap();
        assert!(ok);
        assert_eq!((w.dim_n, w.dim_t, w.rank), (1, 1, 1));
        let (ok, w, _) = infinitesimal_pair_test(&p, &comp(&[1, 0], vec![vec![0, 1], vec![0, 1]]), 8, 1e-7, 0).unwrap();
        assert!(!ok);
        assert_eq!((w.dim_n, w.dim_t, w.dims_matched), (1, 2, false));
        let (ok, w, _) = infinitesimal_pair_test(&p, &comp(&[1, 1], vec![vec![0, 0], vec![0, 0]]), 8, 1e-7, 0).unwrap();
        assert!(ok);
        assert_eq!((w.dim_n, w.dim_t), (0, 0));
    }

    #[test]
    fn upper_bound_pair() {
        // γ = (−1, 1): only the component with both top eigenvalues on the
        // first coordinate is a pair; its value −2 gives c₁ ≤ 2
        let p = horn2();
        let pairs: Vec<_> = component_table(&p, &RationalVector::from_ints(&[-1, 1]), 8, 1e-7, 0, 100)
            .unwrap()
            .into_iter()
            .filter(|t| t.2)
            .collect();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].1, BigRational::from_integer((-2).into()));
    }

    #[test]
    fn admissibility_examples() {
        let p = horn2();
        let a = is_admissible(&p, &RationalVector::from_ints(&[1, 0]), 4, 1e-7, 0, 1000).unwrap();
        assert_eq!(a, Admissibility { admissible: true, dim_z: 1, dim_z_gamma: 2 });
        let a = is_admissible(&p, &RationalVector::from_ints(&[1, 1]), 4, 1e-7, 0, 1000).unwrap();
        assert_eq!(a, Admissibility { admissible: true, dim_z: 1, dim_z_gamma: 1 });
        let q = OrbitProblem::from_ints(&[&[2, 1, 0], &[3, 1, 0]], Mode::Real).unwrap();
        let a = is_admissible(&q, &RationalVector::from_ints(&[2, 1, 0]), 4, 1e-7, 0, 1000).unwrap();
        assert_eq!(a, Admissibility { admissible: false, dim_z: 1, dim_z_gamma: 3 });
    }

    #[test]
    fn scale_invariance() {
        let p = OrbitProblem::from_ints(&[&[2, 1, 0], &[2, 1, 0]], Mode::Real).unwrap();
        for g in [[1, 0, 0], [0, 0, -1], [1, 1, 0], [2, 1, 0]] {
            let g1 = RationalVector::from_ints(&g);
            let g2 = RationalVector::from_ints(&g.map(|x| 2 * x));
            let t1 = component_table(&p, &g1, 4, 1e-7, 5, 1000).unwrap();
            let t2 = component_table(&p, &g2, 4, 1e-7, 5, 1000).unwrap();
            let b1: Vec<bool> = t1.iter().map(|t| t.2).collect();
            let b2: Vec<bool> = t2.iter().map(|t| t.2).collect();
            assert_eq!(b1, b2);
        }
    }
}
