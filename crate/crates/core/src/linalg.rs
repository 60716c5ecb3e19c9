//! Dense helpers shared by the orbit and flow modules: ordered eigenbases,
//! sign-fixed QR, Haar frames and commutators, generic over real and complex
//! scalars.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Scalars supported by the orbit model: `f64` (real locus) and `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    const IS_COMPLEX: bool;
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;
    fn imag_part(self) -> f64;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
    fn imag_part(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }
    fn imag_part(self) -> f64 {
        self.im
    }
}

pub fn from_real<T: Scalar>(x: f64) -> T {
    T::from_real(x)
}

pub fn real_diag<T: Scalar>(d: &[f64]) -> DMatrix<T> {
    DMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&x| T::from_real(x))))
}

/// `(A + A*) / 2`.
pub fn hermitian_part<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    (a + a.adjoint()).scale(0.5)
}

pub fn commutator<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending
/// order. Each eigenvector is phase-fixed so its first entry of modulus above
/// `1e-12` is real positive.
pub fn eigh_ascending<T: Scalar>(a: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let eig = hermitian_part(a).symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut q = DMatrix::<T>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        if let Some(lead) = col.iter().find(|x| x.modulus() > 1e-12).copied() {
            let phase = lead.scale(1.0 / lead.modulus());
            col /= phase;
        }
        q.set_column(dst, &col);
    }
    (values, q)
}

/// Eigenvalues in descending order.
pub fn eigvals_desc<T: Scalar>(a: &DMatrix<T>) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// QR factor `Q` normalized so that `R` has a positive real diagonal.
pub fn qr_positive<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        let d = r[(j, j)];
        if d.modulus() > 0.0 {
            let phase = d.scale(1.0 / d.modulus());
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Haar-distributed element of `SO(n)` (real) or `U(n)` (complex).
pub fn haar_frame<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let g = DMatrix::<T>::from_fn(n, n, |_, _| T::gaussian(rng));
    let mut q = qr_positive(&g);
    if !T::IS_COMPLEX && q.determinant().real() < 0.0 {
        let mut col = q.column_mut(0);
        col.neg_mut();
    }
    q
}

/// Random anti-Hermitian matrix with Gaussian entries.
pub fn gaussian_skew<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let g = DMatrix::<T>::from_fn(n, n, |_, _| T::gaussian(rng));
    (&g - g.adjoint()).scale(0.5)
}

pub fn permutation_matrix<T: Scalar>(perm: &[usize]) -> DMatrix<T> {
    let n = perm.len();
    DMatrix::from_fn(n, n, |i, j| if perm[j] == i { T::one() } else { T::zero() })
}

pub fn max_imag<T: Scalar>(a: &DMatrix<T>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.imag_part().abs()))
}

/// Singular values of a real matrix in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numeric rank with singular values above `tol · σ_max` (and above `tol` in
/// absolute terms when `σ_max < 1`).
pub fn numeric_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let s = singular_values(m);
    let cut = tol * s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&x| x > cut).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigh_orders_and_reconstructs() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let (vals, q) = eigh_ascending(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let back = &q * real_diag::<f64>(&vals) * q.transpose();
        assert!((back - &a).norm() < 1e-12);
        for j in 0..3 {
            let lead = q.column(j).iter().find(|x| x.abs() > 1e-12).copied().unwrap();
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn haar_frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q: DMatrix<f64> = haar_frame(4, &mut rng);
        assert!((q.transpose() * &q - DMatrix::identity(4, 4)).norm() < 1e-12);
        assert!((q.determinant() - 1.0).abs() < 1e-12);
        let u: DMatrix<Complex64> = haar_frame(3, &mut rng);
        assert!((u.adjoint() * &u - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn qr_positive_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, 0.5]);
        let q = qr_positive(&m);
        let r = q.transpose() * &m;
        assert!(r[(0, 0)] > 0.0 && r[(1, 1)] > 0.0);
        assert!(r[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn skew_exponential_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k: DMatrix<f64> = gaussian_skew(4, &mut rng);
        let e = k.exp();
        assert!((e.transpose() * &e - DMatrix::identity(4, 4)).norm() < 1e-12);
    }

    #[test]
    fn rank_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(numeric_rank(&m, 1e-7), 1);
        assert_eq!(numeric_rank(&DMatrix::zeros(2, 2), 1e-7), 0);
    }
}
