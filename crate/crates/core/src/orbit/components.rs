use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{g_action, sample_rng, Mode, OrbitPoint, OrbitProblem, RealPoint};
use crate::error::{Error, Result};
use crate::lie::{next_permutation, RationalVector};
use crate::linalg::{eigh_ascending, haar_frame, hermitian_part, real_diag};

/// Default cap on the number of enumerated components.
pub const DEFAULT_COMPONENT_BOUND: u64 = 1_000_000;

/// A connected component of `Z^γ`: each factor's eigenvalue slots are
/// distributed over the γ-blocks. Indices are 0-based; slot `s` of factor `i`
/// is the `s`-th largest eigenvalue `λ_i[s]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentDescriptor {
    pub gamma: RationalVector,
    /// Coordinates grouped by equal γ-value, blocks in decreasing γ-value.
    pub blocks: Vec<Vec<usize>>,
    /// `assignments[i][s]` is the block receiving slot `s` of factor `i`.
    pub assignments: Vec<Vec<usize>>,
}

impl ComponentDescriptor {
    pub fn block_values(&self) -> Vec<BigRational> {
        self.blocks.iter().map(|b| self.gamma[b[0]].clone()).collect()
    }

    /// Block index of each coordinate.
    pub fn block_of_coord(&self) -> Vec<usize> {
        let n = self.gamma.len();
        let mut out = vec![0; n];
        for (b, coords) in self.blocks.iter().enumerate() {
            for &c in coords {
                out[c] = b;
            }
        }
        out
    }
}

/// Partition of coordinates by distinct γ-values, decreasing.
pub fn gamma_blocks(gamma: &RationalVector) -> Vec<Vec<usize>> {
    gamma.distinct_values_desc().iter().map(|v| (0..gamma.len()).filter(|&i| &gamma[i] == v).collect()).collect()
}

fn multinomial(n: usize, sizes: &[usize]) -> Option<u64> {
    let mut acc: u64 = 1;
    let mut used = 0usize;
    for &s in sizes {
        for j in 1..=s {
            acc = acc.checked_mul((used + j) as u64)? / j as u64;
        }
        used += s;
    }
    debug_assert_eq!(used, n);
    Some(acc)
}

/// All components of `Z^γ`, in lexicographic order of assignments.
pub fn fixed_components(p: &OrbitProblem, gamma: &RationalVector, bound: u64) -> Result<Vec<ComponentDescriptor>> {
    if gamma.len() != p.n {
        return Err(Error::invalid(format!("γ has length {}, expected {}", gamma.len(), p.n)));
    }
    let blocks = gamma_blocks(gamma);
    let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
    let per_factor = multinomial(p.n, &sizes).unwrap_or(u64::MAX);
    let total = (0..p.k).try_fold(1u64, |acc, _| acc.checked_mul(per_factor));
    match total {
        Some(t) if t <= bound => {}
        _ => return Err(Error::ResourceLimit(format!("{per_factor}^{} components of Z^γ exceed bound {bound}", p.k))),
    }

    let mut labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let mut single = Vec::new();
    loop {
        single.push(labels.clone());
        if !next_permutation(&mut labels) {
            break;
        }
    }

    let mut out = Vec::new();
    let mut idx = vec![0usize; p.k];
    loop {
        out.push(ComponentDescriptor {
            gamma: gamma.clone(),
            blocks: blocks.clone(),
            assignments: idx.iter().map(|&i| single[i].clone()).collect(),
        });
        let mut f = p.k;
        loop {
            if f == 0 {
                return Ok(out);
            }
            f -= 1;
            idx[f] += 1;
            if idx[f] < single.len() {
                break;
            }
            idx[f] = 0;
        }
    }
}

fn check_descriptor(p: &OrbitProblem, c: &ComponentDescriptor) -> Result<()> {
    if c.gamma.len() != p.n || c.assignments.len() != p.k {
        return Err(Error::invalid("component does not match problem"));
    }
    for a in &c.assignments {
        for (b, coords) in c.blocks.iter().enumerate() {
            if a.len() != p.n || a.iter().filter(|&&x| x == b).count() != coords.len() {
                return Err(Error::invalid("assignment does not respect block sizes"));
            }
        }
    }
    Ok(())
}

/// A random point of the component: block-diagonal with independent Haar
/// rotations inside each block.
pub fn component_point(p: &OrbitProblem, c: &ComponentDescriptor, seed: u64) -> Result<RealPoint> {
    check_descriptor(p, c)?;
    let mut rng = sample_rng(seed, u64::MAX);
    let spectra = p.spectra_f64();
    let matrices = c
        .assignments
        .iter()
        .zip(&spectra)
        .map(|(assign, l)| {
            let mut a = DMatrix::<f64>::zeros(p.n, p.n);
            for (b, coords) in c.blocks.iter().enumerate() {
                let vals: Vec<f64> = (0..p.n).filter(|&s| assign[s] == b).map(|s| l[s]).collect();
                let m = coords.len();
                let q: DMatrix<f64> = if m > 1 { haar_frame(m, &mut rng) } else { DMatrix::identity(1, 1) };
                let block = hermitian_part(&(&q * real_diag::<f64>(&vals) * q.transpose()));
                for (i, &ci) in coords.iter().enumerate() {
                    for (j, &cj) in coords.iter().enumerate() {
                        a[(ci, cj)] = block[(i, j)];
                    }
                }
            }
            a
        })
        .collect();
    Ok(OrbitPoint { matrices })
}

/// `⟨Φ_p(𝒞), γ⟩ = Σ_i Σ_s λ_i[s] · γ(block(s))`, exactly.
pub fn component_moment_value(p: &OrbitProblem, c: &ComponentDescriptor) -> Result<BigRational> {
    check_descriptor(p, c)?;
    let vals = c.block_values();
    let mut acc = BigRational::zero();
    for (assign, l) in c.assignments.iter().zip(&p.spectra) {
        for (s, &b) in assign.iter().enumerate() {
            acc += &l[s] * &vals[b];
        }
    }
    Ok(acc)
}

fn off_block_norm(z: &RealPoint, block_of: &[usize]) -> f64 {
    z.matrices
        .iter()
        .map(|a| {
            let mut s = 0.0;
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    if block_of[i] != block_of[j] {
                        s += a[(i, j)] * a[(i, j)];
                    }
                }
            }
            s
        })
        .sum::<f64>()
        .sqrt()
}

/// Descriptor of the component of `Z^γ` containing `z`, if `z` is within `tol`
/// of `Z^γ` (block off-diagonal norm) and the block spectra match the slots.
pub fn component_of(p: &OrbitProblem, z: &RealPoint, gamma: &RationalVector, tol: f64) -> Option<ComponentDescriptor> {
    let blocks = gamma_blocks(gamma);
    let desc = ComponentDescriptor { gamma: gamma.clone(), blocks: blocks.clone(), assignments: Vec::new() };
    if off_block_norm(z, &desc.block_of_coord()) > tol {
        return None;
    }
    let spectra = p.spectra_f64();
    let match_tol = (10.0 * tol).max(1e-6) * p.scale();
    let mut assignments = Vec::with_capacity(p.k);
    for (a, l) in z.matrices.iter().zip(&spectra) {
        let mut assign = vec![usize::MAX; p.n];
        for (b, coords) in blocks.iter().enumerate() {
            let sub = DMatrix::from_fn(coords.len(), coords.len(), |i, j| a[(coords[i], coords[j])]);
            let (vals, _) = eigh_ascending(&sub);
            for v in vals {
                let (slot, err) =
                    l.iter().enumerate().map(|(s, x)| (s, (x - v).abs())).min_by(|x, y| x.1.total_cmp(&y.1))?;
                if err > match_tol || assign[slot] != usize::MAX {
                    return None;
                }
                assign[slot] = b;
            }
        }
        assignments.push(assign);
    }
    Some(ComponentDescriptor { assignments, ..desc })
}

/// Controls of the Bialynicki-Birula iteration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BbControls {
    /// Step in units of the smallest gap between distinct γ-values.
    pub dt: f64,
    /// Target block off-diagonal norm.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for BbControls {
    fn default() -> Self {
        BbControls { dt: 2.0, tol: 1e-12, max_steps: 20_000 }
    }
}

/// Rebuilds each diagonal block from its eigenvectors and the matched exact
/// eigenvalues, dropping the off-block part.
fn snap(p: &OrbitProblem, z: &RealPoint, c: &ComponentDescriptor) -> RealPoint {
    let spectra = p.spectra_f64();
    let matrices = z
        .matrices
        .iter()
        .zip(&c.assignments)
        .zip(&spectra)
        .map(|((a, assign), l)| {
            let mut out = DMatrix::<f64>::zeros(p.n, p.n);
            for (b, coords) in c.blocks.iter().enumerate() {
                let m = coords.len();
                let sub = DMatrix::from_fn(m, m, |i, j| a[(coords[i], coords[j])]);
                let (_, q) = eigh_ascending(&sub);
                let mut vals: Vec<f64> = (0..p.n).filter(|&s| assign[s] == b).map(|s| l[s]).collect();
                vals.reverse();
                let block = hermitian_part(&(&q * real_diag::<f64>(&vals) * q.transpose()));
                for (i, &ci) in coords.iter().enumerate() {
                    for (j, &cj) in coords.iter().enumerate() {
                        out[(ci, cj)] = block[(i, j)];
                    }
                }
            }
            out
        })
        .collect();
    OrbitPoint { matrices }
}

/// `lim_{t→∞} exp(tγ)·z` and the component of `Z^γ` it lands in. The returned
/// point is snapped onto `Z^γ` exactly; the step count is also reported.
pub fn bb_limit(
    p: &OrbitProblem,
    z: &RealPoint,
    gamma: &RationalVector,
    controls: &BbControls,
) -> Result<(RealPoint, ComponentDescriptor, usize)> {
    if p.mode != Mode::Real {
        return Err(Error::invalid("bb_limit requires real mode"));
    }
    if gamma.len() != p.n {
        return Err(Error::invalid("γ has wrong length"));
    }
    let blocks = gamma_blocks(gamma);
    if blocks.len() == 1 {
        let c = component_of(p, z, gamma, f64::INFINITY)
            .ok_or_else(|| Error::numeric("bb_limit: spectrum mismatch", 0.0))?;
        return Ok((z.clone(), c, 0));
    }
    let block_of =
        ComponentDescriptor { gamma: gamma.clone(), blocks: blocks.clone(), assignments: vec![] }.block_of_coord();
    let g: Vec<f64> = gamma.to_f64();
    let vals: Vec<f64> = blocks.iter().map(|b| g[b[0]]).collect();
    let gap = vals.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let top = vals[0];
    let step = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        p.n,
        g.iter().map(|x| (controls.dt * (x - top) / gap).exp()),
    ));

    let mut cur = z.clone();
    let mut steps = 0;
    let mut res = off_block_norm(&cur, &block_of);
    while res > controls.tol {
        if steps >= controls.max_steps {
            return Err(Error::numeric("bb_limit did not converge", res));
        }
        cur = g_action(p, &step, &cur)?;
        steps += 1;
        res = off_block_norm(&cur, &block_of);
    }
    let c = component_of(p, &cur, gamma, controls.tol.max(1e-9))
        .ok_or_else(|| Error::numeric("bb_limit: block spectra do not match", res))?;
    Ok((snap(p, &cur, &c), c, steps))
}

#[cfg(test)]
mod tests {
    use super::super::{moment_p, sample};
    use super::*;
    use crate::lie::rational_to_f64;

    fn horn2() -> OrbitProblem {
        OrbitProblem::from_ints(&[&[1, 0], &[1, 0]], Mode::Real).unwrap()
    }

    fn comp(p: &OrbitProblem, g: &[i64], assignments: Vec<Vec<usize>>) -> ComponentDescriptor {
        let gamma = RationalVector::from_ints(g);
        let c = ComponentDescriptor { blocks: gamma_blocks(&gamma), gamma, assignments };
        check_descriptor(p, &c).unwrap();
        c
    }

    #[test]
    fn component_counts() {
        let p = horn2();
        assert_eq!(fixed_components(&p, &RationalVector::from_ints(&[1, 0]), 100).unwrap().len(), 4);
        assert_eq!(fixed_components(&p, &RationalVector::from_ints(&[1, 1]), 100).unwrap().len(), 1);
        let q = OrbitProblem::from_ints(&[&[2, 1, 0]], Mode::Real).unwrap();
        assert_eq!(fixed_components(&q, &RationalVector::from_ints(&[1, 1, 0]), 100).unwrap().len(), 3);
        let r = OrbitProblem::from_ints(&[&[2, 1, 0], &[2, 1, 0], &[2, 1, 0]], Mode::Real).unwrap();
        assert_eq!(fixed_components(&r, &RationalVector::from_ints(&[2, 1, 0]), 1000).unwrap().len(), 216);
        assert!(matches!(
            fixed_components(&r, &RationalVector::from_ints(&[2, 1, 0]), 100),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn component_points() {
        let p = OrbitProblem::from_ints(&[&[1, 0]], Mode::Real).unwrap();
        let e = comp(&p, &[1, 0], vec![vec![0, 1]]);
        let z = component_point(&p, &e, 3).unwrap();
        assert_eq!(z.matrices[0], DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let s = comp(&p, &[1, 0], vec![vec![1, 0]]);
        let z = component_point(&p, &s, 3).unwrap();
        assert_eq!(z.matrices[0], DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));

        let q = OrbitProblem::from_ints(&[&[2, 1, 0]], Mode::Real).unwrap();
        let c = comp(&q, &[1, 1, 0], vec![vec![0, 1, 0]]);
        let z = component_point(&q, &c, 9).unwrap();
        let a = &z.matrices[0];
        assert_eq!(a[(0, 2)], 0.0);
        assert_eq!(a[(2, 2)], 1.0);
        let top = DMatrix::from_fn(2, 2, |i, j| a[(i, j)]);
        let (v, _) = eigh_ascending(&top);
        assert!((v[0] - 0.0).abs() < 1e-12 && (v[1] - 2.0).abs() < 1e-12);
        assert_eq!(component_of(&q, &z, &c.gamma, 1e-12), Some(c));
    }

    #[test]
    fn moment_values() {
        let p = horn2();
        let two = BigRational::from_integer(2.into());
        let one = BigRational::from_integer(1.into());
        assert_eq!(component_moment_value(&p, &comp(&p, &[1, 0], vec![vec![0, 1], vec![0, 1]])).unwrap(), two);
        assert_eq!(component_moment_value(&p, &comp(&p, &[1, 0], vec![vec![0, 1], vec![1, 0]])).unwrap(), one);
        assert_eq!(component_moment_value(&p, &comp(&p, &[1, 1], vec![vec![0, 0], vec![0, 0]])).unwrap(), two);
    }

    #[test]
    fn bb_limit_fixed_point_and_consistency() {
        let p = horn2();
        let gamma = RationalVector::from_ints(&[1, 0]);
        let c = comp(&p, &[1, 0], vec![vec![0, 1], vec![1, 0]]);
        let z = component_point(&p, &c, 0).unwrap();
        let (_, d, steps) = bb_limit(&p, &z, &gamma, &BbControls::default()).unwrap();
        assert_eq!((d, steps), (c, 0));

        let q = OrbitProblem::from_ints(&[&[2, 1, 0], &[3, 1, -1]], Mode::Real).unwrap();
        let gamma = RationalVector::from_ints(&[2, 1, -1]);
        for z in sample::<f64>(&q, 21, 10) {
            let (lim, c, _) = bb_limit(&q, &z, &gamma, &BbControls::default()).unwrap();
            let s = moment_p(&lim);
            let pairing: f64 = (0..3).map(|i| s[(i, i)] * rational_to_f64(&gamma[i])).sum();
            let exact = rational_to_f64(&component_moment_value(&q, &c).unwrap());
            assert!((pairing - exact).abs() < 1e-8);
            assert!(lim.spectrum_drift(&q.spectra_f64()) < 1e-9);
        }
    }

    #[test]
    fn generic_limit_minimizes_the_pairing() {
        // from a generic point the flow lands on the component with the
        // smallest value of ⟨Φ, γ⟩
        let p = horn2();
        let gamma = RationalVector::from_ints(&[1, 0]);
        for z in sample::<f64>(&p, 2, 20) {
            let (_, c, _) = bb_limit(&p, &z, &gamma, &BbControls::default()).unwrap();
            assert_eq!(c.assignments, vec![vec![1, 0], vec![1, 0]]);
        }
    }
}
