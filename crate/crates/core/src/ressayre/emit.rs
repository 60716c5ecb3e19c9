use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{Provenance, RessayrePair};
use crate::lie::{rational_to_f64, solve_exact, RationalVector, RootSystem};
use crate::polytope::{HRep, Halfspace};

/// `⟨ξ, normal⟩ ≥ value` with exact data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inequality {
    pub normal: RationalVector,
    #[serde(with = "crate::lie::rational_string")]
    pub value: BigRational,
    /// True for the chamber walls `⟨ξ, h_α⟩ ≥ 0`.
    pub chamber: bool,
    pub sources: Vec<Provenance>,
}

/// `⟨ξ, normal⟩ = value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equality {
    pub normal: RationalVector,
    #[serde(with = "crate::lie::rational_string")]
    pub value: BigRational,
}

/// An exact H-representation: inequalities reduced modulo the equalities,
/// primitive integer normals, no duplicates.
#[derive(Debug, Clone, Default, Serialize)]
pub struct InequalitySystem {
    pub ambient_dim: usize,
    pub equalities: Vec<Equality>,
    pub inequalities: Vec<Inequality>,
}

impl InequalitySystem {
    pub fn nontrivial(&self) -> impl Iterator<Item = &Inequality> {
        self.inequalities.iter().filter(|i| !i.chamber)
    }

    pub fn to_hrep(&self) -> HRep {
        let conv = |n: &RationalVector, v: &BigRational| {
            let mut h = Halfspace { normal: n.to_f64(), offset: rational_to_f64(v) };
            h.normalize();
            h
        };
        HRep {
            ambient_dim: self.ambient_dim,
            halfspaces: self.inequalities.iter().map(|i| conv(&i.normal, &i.value)).collect(),
            equalities: self.equalities.iter().map(|e| conv(&e.normal, &e.value)).collect(),
        }
    }

    /// Whether the system contains `⟨ξ, normal⟩ ≥ value` after the same
    /// normalization, or the equality form of it.
    pub fn contains(&self, normal: &RationalVector, value: &BigRational) -> bool {
        let (n, v) = normalize(normal, value, &self.equalities);
        if n.is_zero() {
            return !v.is_positive();
        }
        self.inequalities.iter().any(|i| i.normal == n && i.value == v)
    }
}

/// Reduces `(γ, v)` modulo the equalities (orthogonal projection, exact) and
/// rescales to a primitive integer normal.
fn normalize(gamma: &RationalVector, value: &BigRational, eqs: &[Equality]) -> (RationalVector, BigRational) {
    let (mut g, mut v) = (gamma.clone(), value.clone());
    if !eqs.is_empty() {
        let gram: Vec<Vec<BigRational>> =
            eqs.iter().map(|a| eqs.iter().map(|b| a.normal.dot(&b.normal)).collect()).collect();
        let rhs: Vec<BigRational> = eqs.iter().map(|e| e.normal.dot(&g)).collect();
        if let Ok(c) = solve_exact(gram, rhs) {
            for (ci, e) in c.iter().zip(eqs) {
                g = &g - &e.normal.scale(ci);
                v -= ci * &e.value;
            }
        }
    }
    let (prim, scale) = g.primitive();
    if prim.is_zero() {
        return (prim, v);
    }
    (prim, v / scale)
}

/// Builds the inequality system from the chamber walls of `rs` and every
/// pair with `is_pair`. Opposite inequalities `(γ, v)`, `(−γ, −v)` become
/// equalities; among parallel inequalities only the strongest is kept.
pub fn emit_inequalities(pairs: &[RessayrePair], rs: &RootSystem) -> InequalitySystem {
    let dim = rs.dim;
    let raw: Vec<(RationalVector, BigRational, Option<Provenance>)> = rs
        .simple_coroots()
        .into_iter()
        .map(|h| (h, BigRational::zero(), None))
        .chain(pairs.iter().filter(|p| p.is_pair).map(|p| (p.gamma.clone(), p.value.clone(), Some(p.provenance))))
        .collect();

    // equalities from opposite pairs, iterated until stable
    let mut equalities: Vec<Equality> = Vec::new();
    loop {
        let normed: Vec<(RationalVector, BigRational)> =
            raw.iter().map(|(g, v, _)| normalize(g, v, &equalities)).collect();
        let mut found = None;
        'outer: for (i, (g, v)) in normed.iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            for (h, w) in normed.iter().skip(i + 1) {
                if h == &-g && w == &-v {
                    found = Some(Equality { normal: g.clone(), value: v.clone() });
                    break 'outer;
                }
            }
        }
        match found {
            Some(e) => equalities.push(e),
            None => break,
        }
    }
    // canonical sign: first nonzero coordinate positive
    for e in equalities.iter_mut() {
        if e.normal.coords().iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            e.normal = -&e.normal;
            e.value = -e.value.clone();
        }
    }

    let mut best: BTreeMap<RationalVector, Inequality> = BTreeMap::new();
    for (g, v, src) in &raw {
        let (n, val) = normalize(g, v, &equalities);
        if n.is_zero() {
            continue;
        }
        let chamber = src.is_none();
        match best.get_mut(&n) {
            Some(cur) if cur.value > val => {}
            Some(cur) if cur.value == val => {
                cur.chamber |= chamber;
                if let Some(s) = src {
                    if !cur.sources.contains(s) {
                        cur.sources.push(*s);
                    }
                }
            }
            _ => {
                best.insert(
                    n.clone(),
                    Inequality { normal: n, value: val, chamber, sources: src.iter().copied().collect() },
                );
            }
        }
    }
    // a chamber wall stays a chamber wall even when a pair strengthens it
    let walls: Vec<RationalVector> =
        rs.simple_coroots().iter().map(|h| normalize(h, &BigRational::zero(), &equalities).0).collect();
    let mut inequalities: Vec<Inequality> = best.into_values().collect();
    for i in inequalities.iter_mut() {
        if walls.contains(&i.normal) && !i.value.is_positive() {
            i.chamber = true;
        }
    }
    inequalities.sort_by(|a, b| b.chamber.cmp(&a.chamber).then_with(|| a.normal.cmp(&b.normal)));
    InequalitySystem { ambient_dim: dim, equalities, inequalities }
}
