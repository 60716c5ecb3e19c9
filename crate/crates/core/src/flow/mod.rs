//! Norm-square gradient flow of the moment map on orbit products.
//!
//! On `M = O(λ1) × … × O(λk)` with `S = Σ A_j` the flow of `−½‖S‖²` is the
//! double-bracket equation `Ȧ_i = −[A_i, [A_i, S]]`. It is integrated by
//! exact conjugations `A_i ← e^{hΩ_i} A_i e^{−hΩ_i}`, `Ω_i = [A_i, S]`, so the
//! spectra never drift.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::dominant_sweep;
use crate::linalg::{
    commutator, eigh_ascending, eigvals_desc, haar_frame, hermitian_part, max_imag, real_diag, Scalar,
};
use crate::orbit::{moment_p, sample_rng, OrbitPoint, OrbitProblem, RealPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowControls {
    /// Initial step size.
    pub step: f64,
    /// Stop when `max_i ‖[A_i, S]‖ ≤ tol`.
    pub tol: f64,
    pub max_steps: usize,
    /// Step multiplier after a rejected step, in `(0, 1)`.
    pub shrink_factor: f64,
    /// Step multiplier after an accepted step (`1` keeps the step fixed).
    pub grow_factor: f64,
}

impl Default for FlowControls {
    fn default() -> Self {
        FlowControls { step: 0.05, tol: 1e-9, max_steps: 200_000, shrink_factor: 0.5, grow_factor: 1.5 }
    }
}

impl FlowControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::invalid("flow step must be positive"));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(Error::invalid("shrink_factor must lie in (0, 1)"));
        }
        if !(self.grow_factor >= 1.0) {
            return Err(Error::invalid("grow_factor must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult<T: Scalar> {
    pub limit: OrbitPoint<T>,
    pub limit_moment: DMatrix<T>,
    /// Descending spectrum of the limit moment.
    pub type_vector: Vec<f64>,
    /// `f = ½‖S‖²` after each accepted step, starting with the initial value.
    pub f_trace: Vec<f64>,
    pub residual_trace: Vec<f64>,
    pub converged: bool,
    pub residual: f64,
    pub steps: usize,
    /// Largest imaginary part seen on any factor during the run.
    pub max_imag: f64,
}

impl<T: Scalar> FlowResult<T> {
    /// CSV `step,f,residual` with a header row.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,f,residual\n");
        for (i, (f, r)) in self.f_trace.iter().zip(&self.residual_trace).enumerate() {
            out.push_str(&format!("{i},{f:.16e},{r:.16e}\n"));
        }
        out
    }
}

fn half_norm_sq<T: Scalar>(s: &DMatrix<T>) -> f64 {
    0.5 * s.norm_squared()
}

fn residual<T: Scalar>(mats: &[DMatrix<T>], s: &DMatrix<T>) -> f64 {
    mats.iter().map(|a| commutator(a, s).norm()).fold(0.0, f64::max)
}

fn renormalize<T: Scalar>(mats: &mut [DMatrix<T>], spectra: &[Vec<f64>]) {
    for (a, l) in mats.iter_mut().zip(spectra) {
        let (_, q) = eigh_ascending(a);
        let asc: Vec<f64> = l.iter().rev().copied().collect();
        *a = hermitian_part(&(&q * real_diag::<T>(&asc) * q.adjoint()));
    }
}

/// Runs the flow from `z` on the orbit product with the given spectra.
pub fn kirwan_flow_spectra<T: Scalar>(
    spectra: &[Vec<f64>],
    z: &OrbitPoint<T>,
    controls: &FlowControls,
) -> FlowResult<T> {
    let mut mats = z.matrices.clone();
    let mut s = moment_p(&OrbitPoint { matrices: mats.clone() });
    let mut f = half_norm_sq(&s);
    let mut r = residual(&mats, &s);
    let mut h = controls.step;
    let h_max = controls.step * 1e3;
    let mut f_trace = vec![f];
    let mut residual_trace = vec![r];
    let mut imag = mats.iter().map(max_imag).fold(0.0, f64::max);
    let mut steps = 0;

    while r > controls.tol && steps < controls.max_steps {
        let omegas: Vec<DMatrix<T>> = mats.iter().map(|a| commutator(a, &s)).collect();
        let mut accepted = false;
        while h > 1e-14 {
            let cand: Vec<DMatrix<T>> = mats
                .iter()
                .zip(&omegas)
                .map(|(a, w)| {
                    let e = w.scale(h).exp();
                    hermitian_part(&(&e * a * e.adjoint()))
                })
                .collect();
            let s2 = cand.iter().fold(DMatrix::zeros(s.nrows(), s.ncols()), |acc, a| acc + a);
            let f2 = half_norm_sq(&s2);
            let r2 = residual(&cand, &s2);
            if f2 < f || (f2 <= f + 1e-12 * f.max(1.0) && r2 < r) {
                mats = cand;
                s = s2;
                f = f2.min(f);
                r = r2;
                accepted = true;
                break;
            }
            h *= controls.shrink_factor;
        }
        if !accepted {
            break;
        }
        steps += 1;
        if steps % 64 == 0 {
            renormalize(&mut mats, spectra);
            s = moment_p(&OrbitPoint { matrices: mats.clone() });
            f = f.min(half_norm_sq(&s));
            r = residual(&mats, &s);
        }
        imag = imag.max(mats.iter().map(max_imag).fold(0.0, f64::max));
        f_trace.push(f);
        residual_trace.push(r);
        h = (h * controls.grow_factor).min(h_max);
    }

    let type_vector = eigvals_desc(&s);
    FlowResult {
        limit: OrbitPoint { matrices: mats },
        limit_moment: s,
        type_vector,
        f_trace,
        residual_trace,
        converged: r <= controls.tol,
        residual: r,
        steps,
        max_imag: imag,
    }
}

/// Gradient flow of `½‖Φ‖²` from `z`.
pub fn kirwan_flow<T: Scalar>(p: &OrbitProblem, z: &OrbitPoint<T>, controls: &FlowControls) -> FlowResult<T> {
    kirwan_flow_spectra(&p.spectra_f64(), z, controls)
}

/// Output of the shifted flow on `M × O(−ξ)`.
#[derive(Debug, Clone)]
pub struct ShiftedFlow {
    pub xi: Vec<f64>,
    /// Nearest point of the polytope to `ξ`.
    pub xi_prime: Vec<f64>,
    /// `γ_ξ = ξ' − ξ`.
    pub gamma: Vec<f64>,
    /// `‖S‖` at the limit, equal to `‖γ_ξ‖` at a critical point.
    pub dist: f64,
    /// The limit of the original factors, rotated into the eigenbasis of the
    /// shift factor; it lies (numerically) in `Z^γ`.
    pub rotated: RealPoint,
    pub result: FlowResult<f64>,
}

/// Shifting trick: adds a factor with spectrum `−reverse(ξ)` and runs the
/// flow from a Haar point determined by `seed`.
pub fn shifted_flow(p: &OrbitProblem, xi: &[f64], controls: &FlowControls, seed: u64) -> Result<ShiftedFlow> {
    controls.validate()?;
    if xi.len() != p.n {
        return Err(Error::invalid(format!("ξ has length {}, expected {}", xi.len(), p.n)));
    }
    if xi.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::invalid("ξ must be strictly decreasing"));
    }
    let mut spectra = p.spectra_f64();
    spectra.push(xi.iter().rev().map(|x| -x).collect());
    let mut rng = sample_rng(seed, 0);
    let frames: Vec<DMatrix<f64>> = (0..=p.k).map(|_| haar_frame(p.n, &mut rng)).collect();
    let start: RealPoint = OrbitPoint::from_frames(&spectra, &frames);
    let result = kirwan_flow_spectra(&spectra, &start, controls);
    if !result.converged {
        return Err(Error::numeric("shifted flow did not converge", result.residual));
    }

    let c = result.limit.matrices.last().expect("shift factor");
    let (_, q) = eigh_ascending(c);
    let s = &result.limit_moment;
    let rot_s = q.transpose() * s * &q;
    let phi = rot_s - q.transpose() * c * &q;
    let diag: Vec<f64> = (0..p.n).map(|i| phi[(i, i)]).collect();
    let (xi_prime, _) = dominant_sweep(&p.root_system(), &diag);
    let gamma: Vec<f64> = xi_prime.iter().zip(xi).map(|(a, b)| a - b).collect();
    let rotated = OrbitPoint {
        matrices: result.limit.matrices[..p.k].iter().map(|a| hermitian_part(&(q.transpose() * a * &q))).collect(),
    };
    Ok(ShiftedFlow { xi: xi.to_vec(), xi_prime, gamma, dist: s.norm(), rotated, result })
}
