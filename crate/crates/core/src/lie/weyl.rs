use serde::{Deserialize, Serialize};

use super::rational::RationalVector;
use super::roots::{RootFamily, RootSystem};
use crate::error::{Error, Result};

/// Default cap on `|W|` for enumeration.
pub const DEFAULT_WEYL_BOUND: u64 = 3_628_800;

/// A signed permutation acting by `(w·v)_i = signs[i] · v[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeylElement {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl WeylElement {
    pub fn identity(dim: usize) -> Self {
        WeylElement { perm: (0..dim).collect(), signs: vec![1; dim] }
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        self.perm.iter().zip(&self.signs).map(|(&p, &s)| f64::from(s) * v[p]).collect()
    }

    pub fn apply(&self, v: &RationalVector) -> RationalVector {
        RationalVector::new(
            self.perm
                .iter()
                .zip(&self.signs)
                .map(|(&p, &s)| if s < 0 { -v[p].clone() } else { v[p].clone() })
                .collect(),
        )
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        let perm = self.perm.iter().map(|&p| other.perm[p]).collect();
        let signs = self.perm.iter().zip(&self.signs).map(|(&p, &s)| s * other.signs[p]).collect();
        WeylElement { perm, signs }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.signs.iter().all(|&s| s > 0)
    }
}

/// Rearranges `v` into the lexicographically next permutation; returns false
/// (leaving `v` sorted ascending) after the last one. Handles repeated entries.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

pub fn weyl_order(rs: &RootSystem) -> Option<u64> {
    let r = rs.rank;
    match rs.family {
        RootFamily::A => factorial(r + 1),
        RootFamily::B | RootFamily::C => factorial(r)?.checked_mul(1u64.checked_shl(r as u32)?),
        RootFamily::D => factorial(r)?.checked_mul(1u64.checked_shl(r as u32 - 1)?),
    }
}

pub fn weyl_elements(rs: &RootSystem, bound: u64) -> Result<Vec<WeylElement>> {
    let order = weyl_order(rs);
    match order {
        Some(o) if o <= bound => {}
        _ => return Err(Error::ResourceLimit(format!("|W({}{})| exceeds bound {bound}", rs.family, rs.rank))),
    }
    let dim = rs.dim;
    let mut perm: Vec<usize> = (0..dim).collect();
    let mut out = Vec::with_capacity(order.unwrap_or(0) as usize);
    loop {
        match rs.family {
            RootFamily::A => out.push(WeylElement { perm: perm.clone(), signs: vec![1; dim] }),
            family => {
                for mask in 0u32..(1 << dim) {
                    if family == RootFamily::D && mask.count_ones() % 2 == 1 {
                        continue;
                    }
                    let signs = (0..dim).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                    out.push(WeylElement { perm: perm.clone(), signs });
                }
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

/// Moves `v` into the closed dominant chamber; returns `(w·v, w)`.
pub fn dominant_sweep(rs: &RootSystem, v: &[f64]) -> (Vec<f64>, WeylElement) {
    let dim = v.len();
    let key = |x: f64| if rs.family == RootFamily::A { x } else { x.abs() };
    let mut perm: Vec<usize> = (0..dim).collect();
    perm.sort_by(|&a, &b| key(v[b]).total_cmp(&key(v[a])).then(a.cmp(&b)));
    let mut signs: Vec<i8> = match rs.family {
        RootFamily::A => vec![1; dim],
        _ => perm.iter().map(|&p| if v[p] < 0.0 { -1 } else { 1 }).collect(),
    };
    if rs.family == RootFamily::D && signs.iter().filter(|&&s| s < 0).count() % 2 == 1 {
        // odd sign changes are not in W(D); push the sign onto the smallest coordinate
        signs[dim - 1] = -signs[dim - 1];
    }
    let w = WeylElement { perm, signs };
    (w.apply_f64(v), w)
}

/// Whether `v` satisfies every chamber inequality `⟨v, h_α⟩ ≥ −tol`.
pub fn is_dominant(rs: &RootSystem, v: &[f64], tol: f64) -> bool {
    rs.simple_coroots().iter().all(|h| h.dot_f64(v) >= -tol)
}
