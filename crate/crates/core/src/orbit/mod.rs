//! Products of isospectral orbits `M = O(λ1) × … × O(λk)` and their real locus.
//!
//! A point is a tuple of Hermitian (or real symmetric) matrices with the
//! prescribed spectra. The moment map is the sum of the factors.

mod action;
mod components;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{build_root_system, RationalVector, RootFamily, RootSystem};
use crate::linalg::{eigvals_desc, gaussian_skew, haar_frame, permutation_matrix, real_diag, Scalar};

pub use action::{g_action, stabilizer_p_dim, symmetric_basis, tangent_action};
pub use components::{
    bb_limit, component_moment_value, component_of, component_point, fixed_components, BbControls, ComponentDescriptor,
    DEFAULT_COMPONENT_BOUND,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Real,
    Hermitian,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Mode::Real),
            "hermitian" => Ok(Mode::Hermitian),
            other => Err(Error::invalid(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Real => "real",
            Mode::Hermitian => "hermitian",
        })
    }
}

/// `M = O(λ1) × … × O(λk)` with `n × n` factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitProblem {
    pub n: usize,
    pub k: usize,
    pub spectra: Vec<RationalVector>,
    pub mode: Mode,
}

impl OrbitProblem {
    pub fn new(spectra: Vec<RationalVector>, mode: Mode) -> Result<Self> {
        let p = OrbitProblem { n: spectra.first().map_or(0, RationalVector::len), k: spectra.len(), spectra, mode };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor from integer spectra.
    pub fn from_ints(spectra: &[&[i64]], mode: Mode) -> Result<Self> {
        Self::new(spectra.iter().map(|s| RationalVector::from_ints(s)).collect(), mode)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.spectra.len() != self.k {
            return Err(Error::invalid("need at least one factor"));
        }
        if self.n < 2 {
            return Err(Error::invalid(format!("matrix size must be >= 2, got {}", self.n)));
        }
        for (i, s) in self.spectra.iter().enumerate() {
            if s.len() != self.n {
                return Err(Error::invalid(format!("spectrum {i} has length {}, expected {}", s.len(), self.n)));
            }
            if s.coords().windows(2).any(|w| w[0] <= w[1]) {
                return Err(Error::invalid(format!("spectrum {i} = {s} is not strictly decreasing")));
            }
        }
        Ok(())
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        OrbitProblem { mode, ..self.clone() }
    }

    pub fn spectra_f64(&self) -> Vec<Vec<f64>> {
        self.spectra.iter().map(RationalVector::to_f64).collect()
    }

    /// Restricted root system of `GL(n, ℝ)`: type `A_{n−1}` on `ℝ^n`.
    pub fn root_system(&self) -> RootSystem {
        build_root_system(RootFamily::A, self.n - 1).expect("n >= 2")
    }

    /// `Σ_i tr(λ_i)`, the value of the trace on every moment value.
    pub fn total_trace(&self) -> BigRational {
        self.spectra.iter().flat_map(|s| s.coords().iter()).fold(BigRational::zero(), |a, b| a + b)
    }

    /// Smallest gap between consecutive eigenvalues of any factor.
    pub fn min_gap(&self) -> f64 {
        self.spectra_f64()
            .iter()
            .flat_map(|s| s.windows(2).map(|w| w[0] - w[1]).collect::<Vec<_>>())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue modulus across factors.
    pub fn scale(&self) -> f64 {
        self.spectra_f64().iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0)
    }
}

/// A point of `M` (complex scalars) or `Z` (real scalars).
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitPoint<T: Scalar> {
    pub matrices: Vec<DMatrix<T>>,
}

pub type RealPoint = OrbitPoint<f64>;
pub type HermitianPoint = OrbitPoint<Complex64>;

impl<T: Scalar> OrbitPoint<T> {
    /// `A_i = Q_i diag(λ_i) Q_i*`.
    pub fn from_frames(spectra: &[Vec<f64>], frames: &[DMatrix<T>]) -> Self {
        let matrices = spectra
            .iter()
            .zip(frames)
            .map(|(l, q)| crate::linalg::hermitian_part(&(q * real_diag::<T>(l) * q.adjoint())))
            .collect();
        OrbitPoint { matrices }
    }

    pub fn diagonal(spectra: &[Vec<f64>]) -> Self {
        OrbitPoint { matrices: spectra.iter().map(|l| real_diag::<T>(l)).collect() }
    }

    /// Largest deviation of a factor's sorted spectrum from the prescribed one.
    pub fn spectrum_drift(&self, spectra: &[Vec<f64>]) -> f64 {
        self.matrices
            .iter()
            .zip(spectra)
            .map(|(a, l)| eigvals_desc(a).iter().zip(l).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

impl RealPoint {
    pub fn to_complex(&self) -> HermitianPoint {
        OrbitPoint { matrices: self.matrices.iter().map(|a| a.map(|x| Complex64::new(x, 0.0))).collect() }
    }
}

/// `Φ_p(z) = Σ_i A_i`.
pub fn moment_p<T: Scalar>(z: &OrbitPoint<T>) -> DMatrix<T> {
    let n = z.matrices[0].nrows();
    z.matrices.iter().fold(DMatrix::zeros(n, n), |acc, a| acc + a)
}

/// Descending spectrum of `Φ_p(z)`, its image in the closed chamber.
pub fn moment_chamber<T: Scalar>(z: &OrbitPoint<T>) -> Vec<f64> {
    eigvals_desc(&moment_p(z))
}

/// Distribution of the per-factor frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sampler {
    /// Haar measure on `SO(n)` / `U(n)`.
    Haar,
    /// With probability `fraction` a factor uses the frame `P·exp(s·K)` with
    /// `P` a uniform permutation, `K` Gaussian anti-Hermitian and
    /// `log10 s` uniform on `[-4, 0]`; otherwise Haar. Concentrates samples
    /// near the fixed points of the torus, where the polytope's vertices are.
    Enriched { fraction: f64 },
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::Enriched { fraction: 0.5 }
    }
}

/// Deterministic RNG for sample `index` of stream `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn frame<T: Scalar, R: Rng>(n: usize, sampler: Sampler, rng: &mut R) -> DMatrix<T> {
    match sampler {
        Sampler::Enriched { fraction } if rng.random::<f64>() < fraction => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            let k: DMatrix<T> = gaussian_skew(n, rng);
            let s = 10f64.powf(rng.random_range(-4.0..=0.0));
            permutation_matrix::<T>(&perm) * k.scale(s).exp()
        }
        _ => haar_frame(n, rng),
    }
}

/// One sample, a pure function of `(seed, index)`.
pub fn sample_one<T: Scalar>(p: &OrbitProblem, seed: u64, index: u64, sampler: Sampler) -> OrbitPoint<T> {
    let mut rng = sample_rng(seed, index);
    let spectra = p.spectra_f64();
    let frames: Vec<DMatrix<T>> = (0..p.k).map(|_| frame(p.n, sampler, &mut rng)).collect();
    OrbitPoint::from_frames(&spectra, &frames)
}

/// `count` samples with Haar frames, ordered by index.
pub fn sample<T: Scalar>(p: &OrbitProblem, seed: u64, count: usize) -> Vec<OrbitPoint<T>> {
    sample_with::<T>(p, seed, count, Sampler::Haar)
}

pub fn sample_with<T: Scalar>(p: &OrbitProblem, seed: u64, count: usize, sampler: Sampler) -> Vec<OrbitPoint<T>> {
    (0..count as u64).into_par_iter().map(|i| sample_one(p, seed, i, sampler)).collect()
}

/// Chamber images of `count` samples in the problem's mode, ordered by index.
pub fn sample_chamber(p: &OrbitProblem, seed: u64, count: usize, sampler: Sampler) -> Vec<Vec<f64>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| match p.mode {
            Mode::Real => moment_chamber(&sample_one::<f64>(p, seed, i, sampler)),
            Mode::Hermitian => moment_chamber(&sample_one::<Complex64>(p, seed, i, sampler)),
        })
        .collect()
}
