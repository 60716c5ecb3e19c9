use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::RationalVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootFamily {
    A,
    B,
    C,
    D,
}

impl fmt::Display for RootFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootFamily::A => "A",
            RootFamily::B => "B",
            RootFamily::C => "C",
            RootFamily::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for RootFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(RootFamily::A),
            "B" => Ok(RootFamily::B),
            "C" => Ok(RootFamily::C),
            "D" => Ok(RootFamily::D),
            other => Err(Error::invalid(format!("unsupported root family `{other}`"))),
        }
    }
}

/// A classical reduced root system realized in `ℝ^dim` with the standard
/// (identity) Gram matrix. Type `A_r` lives in `ℝ^{r+1}`, the others in `ℝ^r`.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub family: RootFamily,
    pub rank: usize,
    pub dim: usize,
    pub roots: Vec<RationalVector>,
    pub positive_roots: Vec<RationalVector>,
    /// Ordered `α_1, …, α_r`, ordered by leading coordinate.
    pub simple_roots: Vec<RationalVector>,
    pub form_matrix: Vec<Vec<BigRational>>,
    /// `simple_coords[j]` expresses `positive_roots[j]` in the simple basis.
    pub simple_coords: Vec<Vec<BigRational>>,
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

fn signed_pair(dim: usize, i: usize, si: i64, j: usize, sj: i64) -> RationalVector {
    let mut v = vec![BigRational::zero(); dim];
    v[i] = int(si);
    v[j] = int(sj);
    RationalVector::new(v)
}

fn scaled_unit(dim: usize, i: usize, s: i64) -> RationalVector {
    let mut v = vec![BigRational::zero(); dim];
    v[i] = int(s);
    RationalVector::new(v)
}

/// Regular vector `(1, 1/2, 1/4, …)` fixing the positive system.
pub fn regular_vector(dim: usize) -> RationalVector {
    RationalVector::new(
        (0..dim).map(|i| BigRational::new(1.into(), num_bigint::BigInt::from(2).pow(i as u32))).collect(),
    )
}

pub fn build_root_system(family: RootFamily, rank: usize) -> Result<RootSystem> {
    let min_rank = if family == RootFamily::D { 2 } else { 1 };
    if rank < min_rank {
        return Err(Error::invalid(format!("type {family} needs rank >= {min_rank}, got {rank}")));
    }
    let dim = if family == RootFamily::A { rank + 1 } else { rank };
    let mut roots = Vec::new();
    match family {
        RootFamily::A => {
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        roots.push(signed_pair(dim, i, 1, j, -1));
                    }
                }
            }
        }
        RootFamily::B | RootFamily::C | RootFamily::D => {
            for i in 0..dim {
                for j in (i + 1)..dim {
                    for (si, sj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                        roots.push(signed_pair(dim, i, si, j, sj));
                    }
                }
            }
            let short = match family {
                RootFamily::B => Some(1),
                RootFamily::C => Some(2),
                _ => None,
            };
            if let Some(len) = short {
                for i in 0..dim {
                    roots.push(scaled_unit(dim, i, len));
                    roots.push(scaled_unit(dim, i, -len));
                }
            }
        }
    }
    roots.sort();

    let reg = regular_vector(dim);
    let positive_roots: Vec<RationalVector> = roots.iter().filter(|a| a.dot(&reg).is_positive()).cloned().collect();

    // A positive root is simple iff it is not the sum of two positive roots.
    let pos_set: BTreeSet<&RationalVector> = positive_roots.iter().collect();
    let mut simple_roots: Vec<RationalVector> = positive_roots
        .iter()
        .filter(|a| !positive_roots.iter().any(|b| pos_set.contains(&(&**a - b))))
        .cloned()
        .collect();
    simple_roots.sort_by(|a, b| {
        let lead = |v: &RationalVector| v.coords().iter().position(|x| !x.is_zero());
        lead(a).cmp(&lead(b)).then_with(|| a.cmp(b))
    });

    let form_matrix: Vec<Vec<BigRational>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();

    let mut rs =
        RootSystem { family, rank, dim, roots, positive_roots, simple_roots, form_matrix, simple_coords: Vec::new() };
    if rs.simple_roots.len() != rank {
        return Err(Error::invalid(format!("found {} simple roots for {family}{rank}", rs.simple_roots.len())));
    }
    rs.simple_coords = rs.positive_roots.iter().map(|b| rs.in_simple_basis(b)).collect::<Result<Vec<_>>>()?;
    Ok(rs)
}

impl RootSystem {
    /// Inner product `(x, y)_b` through the Gram matrix.
    pub fn form(&self, x: &RationalVector, y: &RationalVector) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if !self.form_matrix[i][j].is_zero() {
                    acc += &self.form_matrix[i][j] * &x[i] * &y[j];
                }
            }
        }
        acc
    }

    pub fn is_root(&self, a: &RationalVector) -> bool {
        self.roots.binary_search(a).is_ok()
    }

    /// Coordinates of `v` in the simple-root basis (exact; `v` must lie in their span).
    pub fn in_simple_basis(&self, v: &RationalVector) -> Result<Vec<BigRational>> {
        let r = self.rank;
        let gram: Vec<Vec<BigRational>> =
            (0..r).map(|i| (0..r).map(|j| self.form(&self.simple_roots[i], &self.simple_roots[j])).collect()).collect();
        let rhs: Vec<BigRational> = (0..r).map(|i| self.form(&self.simple_roots[i], v)).collect();
        let c = solve_exact(gram, rhs)?;
        let back =
            c.iter().zip(&self.simple_roots).fold(RationalVector::zeros(self.dim), |acc, (ci, a)| &acc + &a.scale(ci));
        if &back != v {
            return Err(Error::invalid(format!("{v} is not in the root span")));
        }
        Ok(c)
    }

    /// Chamber walls: the coroots of the simple roots. The closed chamber is
    /// `{ξ : ⟨ξ, h_α⟩ ≥ 0 for all simple α}`.
    pub fn simple_coroots(&self) -> Vec<RationalVector> {
        self.simple_roots.iter().map(|a| coroot(self, a).expect("simple roots are roots")).collect()
    }

    /// All chamber faces, one per subset of simple roots, in subset order.
    pub fn faces(&self) -> Vec<ChamberFace> {
        (0u64..(1u64 << self.rank))
            .map(|mask| {
                let s: BTreeSet<usize> = (0..self.rank).filter(|i| mask >> i & 1 == 1).collect();
                ChamberFace::new(self, s).expect("indices in range")
            })
            .collect()
    }

    /// The open face containing `x`: simple roots with `|⟨x, h_α⟩| ≤ tol`.
    pub fn face_of_point(&self, x: &[f64], tol: f64) -> ChamberFace {
        let s = self
            .simple_coroots()
            .iter()
            .enumerate()
            .filter(|(_, h)| h.dot_f64(x).abs() <= tol)
            .map(|(i, _)| i)
            .collect();
        ChamberFace::new(self, s).expect("indices in range")
    }
}

/// Gaussian elimination over the rationals; `a` must be square and invertible.
pub fn solve_exact(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or_else(|| Error::invalid("singular system"))?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] * &inv;
                for c in col..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    Ok((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// The `b`-dual `h_α` of a root: `⟨α, X⟩ = (h_α, X)_b` for all `X`.
pub fn coroot(rs: &RootSystem, alpha: &RationalVector) -> Result<RationalVector> {
    if alpha.len() != rs.dim || !rs.is_root(alpha) {
        return Err(Error::invalid(format!("{alpha} is not a root of {}{}", rs.family, rs.rank)));
    }
    solve_exact(rs.form_matrix.clone(), alpha.coords().to_vec()).map(RationalVector::new)
}

/// An open face of the closed chamber, labelled by the simple roots vanishing on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChamberFace {
    pub vanishing_simple_roots: BTreeSet<usize>,
    pub sigma_plus_s: Vec<RationalVector>,
}

impl ChamberFace {
    pub fn new(rs: &RootSystem, s: BTreeSet<usize>) -> Result<Self> {
        if let Some(&bad) = s.iter().find(|&&i| i >= rs.rank) {
            return Err(Error::invalid(format!("simple root index {bad} out of range")));
        }
        let sigma_plus_s = rs
            .positive_roots
            .iter()
            .zip(&rs.simple_coords)
            .filter(|(_, c)| c.iter().enumerate().all(|(i, ci)| ci.is_zero() || s.contains(&i)))
            .map(|(a, _)| a.clone())
            .collect();
        Ok(ChamberFace { vanishing_simple_roots: s, sigma_plus_s })
    }

    pub fn is_interior(&self) -> bool {
        self.vanishing_simple_roots.is_empty()
    }

    /// Basis of the linear span of the face: the common kernel of the
    /// vanishing simple roots, computed exactly.
    pub fn span_basis(&self, rs: &RootSystem) -> Vec<RationalVector> {
        let rows: Vec<Vec<BigRational>> =
            self.vanishing_simple_roots.iter().map(|&i| rs.simple_roots[i].coords().to_vec()).collect();
        nullspace_exact(rows, rs.dim)
    }
}

/// Exact kernel basis of the matrix with the given rows.
pub fn nullspace_exact(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Vec<RationalVector> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..ncols {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); ncols];
            v[free] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[i][free].clone();
            }
            RationalVector::new(v)
        })
        .collect()
}

/// `γ_s = −Σ_{α ∈ Σ⁺_s} h_α`.
pub fn gamma_s(rs: &RootSystem, face: &ChamberFace) -> RationalVector {
    face.sigma_plus_s
        .iter()
        .map(|a| coroot(rs, a).expect("Σ⁺_s consists of roots"))
        .fold(RationalVector::zeros(rs.dim), |acc, h| &acc - &h)
}
