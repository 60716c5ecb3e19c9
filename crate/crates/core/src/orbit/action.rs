use nalgebra::DMatrix;

use super::{OrbitPoint, OrbitProblem, RealPoint};
use crate::error::{Error, Result};
use crate::linalg::{commutator, eigh_ascending, hermitian_part, numeric_rank, qr_positive, real_diag};

fn real_only(p: &OrbitProblem) -> Result<()> {
    if p.mode != super::Mode::Real {
        return Err(Error::invalid("operation requires real mode"));
    }
    Ok(())
}

/// Action of `g ∈ GL(n, ℝ)⁺` by transport of the eigenflag. The flag of each
/// factor is ordered by ascending eigenvalue; `gQ` is re-orthonormalized by QR
/// with positive diagonal and the exact spectrum is put back.
pub fn g_action(p: &OrbitProblem, g: &DMatrix<f64>, z: &RealPoint) -> Result<RealPoint> {
    real_only(p)?;
    let det = g.determinant();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::invalid(format!("g must have positive determinant, got {det:e}")));
    }
    let spectra = p.spectra_f64();
    let matrices = z
        .matrices
        .iter()
        .zip(&spectra)
        .map(|(a, l)| {
            let (_, q) = eigh_ascending(a);
            let q2 = qr_positive(&(g * q));
            let asc: Vec<f64> = l.iter().rev().copied().collect();
            hermitian_part(&(&q2 * real_diag::<f64>(&asc) * q2.transpose()))
        })
        .collect();
    Ok(OrbitPoint { matrices })
}

/// Infinitesimal action `ρ_z(X)` of `X ∈ 𝔤𝔩(n, ℝ)`: per factor
/// `[Q π(QᵀXQ) Qᵀ, A]` with `π(Y) = L − Lᵀ`, `L` the strictly lower part of `Y`.
pub fn tangent_action(p: &OrbitProblem, x: &DMatrix<f64>, z: &RealPoint) -> Result<Vec<DMatrix<f64>>> {
    real_only(p)?;
    let tol = 1e-9 * p.scale();
    z.matrices
        .iter()
        .map(|a| {
            let (vals, q) = eigh_ascending(a);
            if vals.windows(2).any(|w| w[1] - w[0] < tol) {
                return Err(Error::invalid("repeated eigenvalue in a factor"));
            }
            let y = q.transpose() * x * &q;
            let n = y.nrows();
            let omega = DMatrix::from_fn(n, n, |i, j| {
                if i > j {
                    y[(i, j)]
                } else if i < j {
                    -y[(j, i)]
                } else {
                    0.0
                }
            });
            Ok(commutator(&(&q * omega * q.transpose()), a))
        })
        .collect()
}

/// Orthonormal basis of symmetric `n × n` matrices (Frobenius inner product).
pub fn symmetric_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let mut m = DMatrix::zeros(n, n);
            if i == j {
                m[(i, i)] = 1.0;
            } else {
                let s = 0.5f64.sqrt();
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
            out.push(m);
        }
    }
    out
}

/// `dim 𝔭_z`: kernel dimension of `X ↦ ρ_z(X)` on symmetric `X`.
pub fn stabilizer_p_dim(p: &OrbitProblem, z: &RealPoint, tol: f64) -> Result<usize> {
    let basis = symmetric_basis(p.n);
    let cols = basis.iter().map(|x| tangent_action(p, x, z)).collect::<Result<Vec<_>>>()?;
    let rows = p.k * p.n * p.n;
    let m = DMatrix::from_fn(rows, cols.len(), |r, c| {
        let f = r / (p.n * p.n);
        let e = r % (p.n * p.n);
        cols[c][f][(e / p.n, e % p.n)]
    });
    Ok(cols.len() - numeric_rank(&m, tol))
}
