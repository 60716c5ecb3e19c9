use std::fmt;
use std::ops::{Add, Index, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| Error::invalid(format!("bad rational `{s}`")))?;
        let q = BigInt::from_str(q.trim()).map_err(|_| Error::invalid(format!("bad rational `{s}`")))?;
        if q.is_zero() {
            return Err(Error::invalid(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let digits = frac.len() as u32;
        let whole = format!("{}{}", int, frac);
        let num = BigInt::from_str(&whole).map_err(|_| Error::invalid(format!("bad decimal `{s}`")))?;
        let den = BigInt::from(10u32).pow(digits);
        // "-0.5" parses as "-05" which keeps its sign; guard "-.5"-style input
        let r = BigRational::new(num, den);
        return Ok(if neg && r.is_positive() { -r } else { r });
    }
    BigInt::from_str(s).map(BigRational::from_integer).map_err(|_| Error::invalid(format!("bad rational `{s}`")))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // huge numerator/denominator: divide as floats of the leading digits
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Best continued-fraction convergent of `x` whose denominator does not exceed `max_den`.
pub fn approximate(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let max_den = max_den.max(1) as i128;
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        if k_next > max_den {
            break;
        }
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
        let frac = rem - a as f64;
        if frac.abs() < 1e-12 {
            break;
        }
        rem = 1.0 / frac;
    }
    if k == 0 {
        return None;
    }
    Some(BigRational::new(BigInt::from(h), BigInt::from(k)))
}

/// Exact vector of rationals in the diagonal basis `e_1..e_n` of `𝔞`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RationalVector(Vec<BigRational>);

impl RationalVector {
    pub fn new(coords: Vec<BigRational>) -> Self {
        RationalVector(coords)
    }

    pub fn zeros(n: usize) -> Self {
        RationalVector(vec![BigRational::zero(); n])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        RationalVector(v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    /// `(p, q)` pairs, each meaning `p/q`.
    pub fn from_fracs(v: &[(i64, i64)]) -> Self {
        RationalVector(v.iter().map(|&(p, q)| BigRational::new(p.into(), q.into())).collect())
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = BigRational::one();
        v
    }

    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        items.iter().map(|s| parse_rational(s.as_ref())).collect::<Result<Vec<_>>>().map(RationalVector)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<BigRational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Standard pairing `Σ a_i b_i` between `𝔞*` and `𝔞`.
    pub fn dot(&self, other: &RationalVector) -> BigRational {
        assert_eq!(self.len(), other.len(), "dimension mismatch");
        self.0.iter().zip(&other.0).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn dot_f64(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(a, b)| rational_to_f64(a) * b).sum()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        RationalVector(self.0.iter().map(|a| a * c).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    pub fn norm_f64(&self) -> f64 {
        self.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Returns `(v, c)` with `self = c · v`, `c > 0` and `v` an integer vector
    /// whose entries have gcd 1. The zero vector maps to `(0, 1)`.
    pub fn primitive(&self) -> (RationalVector, BigRational) {
        if self.is_zero() {
            return (self.clone(), BigRational::one());
        }
        let lcm = self.0.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()));
        let ints: Vec<BigInt> =
            self.0.iter().map(|a| (a * BigRational::from_integer(lcm.clone())).to_integer()).collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
        let v = RationalVector(ints.iter().map(|a| BigRational::from_integer(a / &gcd)).collect());
        (v, BigRational::new(gcd, lcm))
    }

    /// Distinct coordinate values in decreasing order.
    pub fn distinct_values_desc(&self) -> Vec<BigRational> {
        let mut vals = self.0.clone();
        vals.sort();
        vals.dedup();
        vals.reverse();
        vals
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|a| a.to_string()).collect()
    }
}

/// Rational direction approximating `v`: scaled so that the largest entry has
/// modulus one, each entry approximated with denominator at most `max_den`,
/// then normalized to a primitive integer vector. Fails when the normalized
/// result is farther than `tol` from `v / ‖v‖`.
pub fn rationalize_direction(v: &[f64], max_den: u64, tol: f64) -> Option<RationalVector> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let coords = v.iter().map(|x| approximate(x / max, max_den)).collect::<Option<Vec<_>>>()?;
    let r = RationalVector::new(coords);
    if r.is_zero() {
        return None;
    }
    let (prim, _) = r.primitive();
    let pf = prim.to_f64();
    let pn = prim.norm_f64();
    let err = pf.iter().zip(v).map(|(a, b)| (a / pn - b / norm).powi(2)).sum::<f64>().sqrt();
    (err <= tol).then_some(prim)
}

impl Index<usize> for RationalVector {
    type Output = BigRational;
    fn index(&self, i: usize) -> &BigRational {
        &self.0[i]
    }
}

impl Add for &RationalVector {
    type Output = RationalVector;
    fn add(self, rhs: &RationalVector) -> RationalVector {
        assert_eq!(self.len(), rhs.len(), "dimension mismatch");
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RationalVector {
    type Output = RationalVector;
    fn sub(self, rhs: &RationalVector) -> RationalVector {
        assert_eq!(self.len(), rhs.len(), "dimension mismatch");
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &RationalVector {
    type Output = RationalVector;
    fn neg(self) -> RationalVector {
        RationalVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Debug for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        RationalVector::parse(&items).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing a single rational as a `"p/q"` string.
pub mod rational_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        r.to_string().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
