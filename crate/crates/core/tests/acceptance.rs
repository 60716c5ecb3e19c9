//! Acceptance suite A1–A9. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use rmp_core::flow::{kirwan_flow, FlowControls};
use rmp_core::lie::{build_root_system, coroot, gamma_s, RationalVector, RootFamily};
use rmp_core::orbit::{
    fixed_components, g_action, sample, sample_chamber, sample_one, tangent_action, ComponentDescriptor, Mode,
    OrbitProblem, RealPoint, Sampler,
};
use rmp_core::polytope::{hausdorff_vrep, hull_from_points, membership, project_point, Polytope};
use rmp_core::ressayre::{
    dim_p_z, generate_projection_pair, infinitesimal_pair_test, verify_theorem, PairOptions, Provenance, VerifyOptions,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn horn2() -> OrbitProblem {
    OrbitProblem::from_ints(&[&[1, 0], &[1, 0]], Mode::Real).unwrap()
}

fn horn3() -> OrbitProblem {
    OrbitProblem::from_ints(&[&[2, 1, 0], &[2, 1, 0]], Mode::Real).unwrap()
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn rv(v: &[i64]) -> RationalVector {
    RationalVector::from_ints(v)
}

fn a1() -> Outcome {
    let start = Instant::now();
    let p = horn2();
    let r = verify_theorem(&p, &VerifyOptions { samples: 10_000, ..Default::default() }).map_err(|e| e.to_string())?;
    let eqs: Vec<(RationalVector, BigRational)> =
        r.system.equalities.iter().map(|e| (e.normal.clone(), e.value.clone())).collect();
    ensure(eqs == vec![(rv(&[1, 1]), q(2))], || format!("equalities {eqs:?}"))?;
    let mut ineqs: Vec<(RationalVector, BigRational)> =
        r.system.inequalities.iter().map(|i| (i.normal.clone(), i.value.clone())).collect();
    ineqs.sort();
    let mut want = vec![(rv(&[1, -1]), q(0)), (rv(&[-1, 1]), q(-2))];
    want.sort();
    ensure(ineqs == want, || format!("inequalities {ineqs:?}"))?;
    let facet_pairs = r.pairs.iter().filter(|p| p.provenance == Provenance::Facet && p.is_pair).count();
    ensure(facet_pairs == 2, || format!("{facet_pairs} facet pairs"))?;
    ensure(r.soundness_violation <= 1e-8, || format!("soundness {:e}", r.soundness_violation))?;
    ensure(r.hausdorff <= 1e-2, || format!("hausdorff {:e}", r.hausdorff))?;
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(10), || format!("runtime {t:?}"))?;
    Ok(format!(
        "system {{c1+c2=2, c1-c2>=0, -c1+c2>=-2}}, soundness {:.1e}, hausdorff {:.1e}, {:.1?}",
        r.soundness_violation, r.hausdorff, t
    ))
}

/// Classical Horn inequalities for `n = 3`, `a = b = (2, 1, 0)`, as `(normal, value)`
/// in the form `⟨c, normal⟩ ≥ value`.
fn horn3_classical() -> Vec<(Vec<f64>, f64)> {
    let a = [2.0, 1.0, 0.0];
    let b = a;
    let mut out = Vec::new();
    // c_k ≤ a_i + b_j, i + j = k + 1 (0-based: i + j = k)
    for k in 0..3 {
        for i in 0..=k {
            let j = k - i;
            let mut nrm = vec![0.0; 3];
            nrm[k] = -1.0;
            out.push((nrm, -(a[i] + b[j])));
        }
    }
    // c_k + c_l ≤ a_i + a_j + b_r + b_s for the n = 3, r = 2 triples
    let triples: [([usize; 2], [usize; 2], [usize; 2]); 6] = [
        ([0, 1], [0, 1], [0, 1]),
        ([0, 1], [0, 2], [0, 2]),
        ([0, 2], [0, 1], [0, 2]),
        ([0, 1], [1, 2], [1, 2]),
        ([1, 2], [0, 1], [1, 2]),
        ([0, 2], [0, 2], [1, 2]),
    ];
    for (i, j, k) in triples {
        let mut nrm = vec![0.0; 3];
        nrm[k[0]] -= 1.0;
        nrm[k[1]] -= 1.0;
        out.push((nrm, -(a[i[0]] + a[i[1]] + b[j[0]] + b[j[1]])));
    }
    out
}

fn a2() -> Outcome {
    let start = Instant::now();
    let p = horn3();
    let r = verify_theorem(&p, &VerifyOptions { samples: 100_000, ..Default::default() }).map_err(|e| e.to_string())?;
    ensure(r.soundness_violation <= 1e-8, || format!("soundness {:e}", r.soundness_violation))?;
    let mut worst: f64 = 0.0;
    let mut nontrivial = 0;
    for (ineq, s) in r.system.inequalities.iter().zip(&r.min_slack) {
        if !ineq.chamber {
            nontrivial += 1;
            worst = worst.max(*s);
        }
    }
    ensure(nontrivial > 0, || "no non-trivial facet emitted".into())?;
    ensure(worst <= 1e-3, || format!("a non-trivial facet has min slack {worst:e}"))?;
    ensure(r.hausdorff <= 2e-2, || format!("hausdorff {:e}", r.hausdorff))?;
    ensure(r.certified, || "a sampled facet has no certifying inequality".into())?;
    // the emitted region implies every classical Horn inequality
    for v in &r.region_vertices {
        for (nrm, val) in horn3_classical() {
            let s: f64 = nrm.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - val;
            ensure(s >= -1e-9, || format!("Horn inequality {nrm:?} >= {val} fails at {v:?}"))?;
        }
    }
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(120), || format!("runtime {t:?}"))?;
    Ok(format!(
        "{nontrivial} non-trivial facets, soundness {:.1e}, max facet slack {worst:.1e}, hausdorff {:.1e}, {:.1?}",
        r.soundness_violation, r.hausdorff, t
    ))
}

fn a3() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    for p in [horn2(), horn3()] {
        let hull = |mode: Mode| -> Result<Polytope, String> {
            let pm = p.with_mode(mode);
            let cloud = sample_chamber(&pm, 7, 100_000, Sampler::default());
            hull_from_points(&cloud, 1e-7 * p.scale()).map_err(|e| e.to_string())
        };
        let hr = hull(Mode::Real)?;
        let hh = hull(Mode::Hermitian)?;
        let d = hausdorff_vrep(&hr.vertices, &hh.vertices);
        ensure(d <= 1e-2, || format!("n={}: hausdorff {d:e}", p.n))?;
        parts.push(format!("n={} {d:.1e}", p.n));
    }
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(180), || format!("runtime {t:?}"))?;
    Ok(format!("real vs hermitian hulls: {}, {:.1?}", parts.join(", "), t))
}

fn a4() -> Outcome {
    let p = horn2();
    let cloud = sample_chamber(&p, 11, 10_000, Sampler::default());
    let poly = hull_from_points(&cloud, 1e-7).map_err(|e| e.to_string())?;
    let (target, _) = project_point(&poly, &[0.0, 0.0]);
    let starts: Vec<RealPoint> = sample(&p, 2024, 200);
    let results: Vec<(bool, f64, f64)> = starts
        .par_iter()
        .map(|z| {
            let r = kirwan_flow(&p, z, &FlowControls::default());
            let err = r.type_vector.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (r.converged && r.residual <= 1e-9, r.residual, err)
        })
        .collect();
    let bad = results.iter().filter(|r| !r.0).count();
    ensure(bad == 0, || format!("{bad} of 200 flows did not converge"))?;
    let worst = results.iter().map(|r| r.2).fold(0.0, f64::max);
    ensure(worst <= 1e-4, || format!("type vector differs from the projection of 0 by {worst:e}"))?;
    Ok(format!("200/200 converged, projection of 0 = {target:.6?}, max deviation {worst:.1e}"))
}

/// Random strictly decreasing point at distance at least `0.05·scale` from `poly`.
fn exterior_probe(p: &OrbitProblem, poly: &Polytope, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let center: Vec<f64> =
        (0..p.n).map(|j| poly.vertices.iter().map(|v| v[j]).sum::<f64>() / poly.vertices.len() as f64).collect();
    loop {
        let mut xi: Vec<f64> = center.iter().map(|c| c + rng.random_range(-2.0..2.0) * p.scale()).collect();
        xi.sort_by(|a, b| b.total_cmp(a));
        if xi.windows(2).any(|w| w[0] - w[1] < 1e-2) {
            continue;
        }
        if membership(poly, &xi, 1e-9).0 || project_point(poly, &xi).1 < 0.05 * p.scale() {
            continue;
        }
        return xi;
    }
}

fn a5() -> Outcome {
    let mut parts = Vec::new();
    for p in [horn2(), horn3()] {
        let cloud = sample_chamber(&p, 5, 100_000, Sampler::default());
        let poly = hull_from_points(&cloud, 1e-7 * p.scale()).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(99 + p.n as u64);
        let probes: Vec<Vec<f64>> = (0..50).map(|_| exterior_probe(&p, &poly, &mut rng)).collect();
        let opts = PairOptions::default();
        let dz = dim_p_z(&p, 4, 1e-7, 0).map_err(|e| e.to_string())?;
        let rows: Vec<Result<(f64, f64), String>> = probes
            .par_iter()
            .map(|xi| {
                let (pair, sf) =
                    generate_projection_pair(&p, Some(&poly), xi, dz, &opts).map_err(|e| format!("{xi:?}: {e}"))?;
                let dist_err = (sf.dist - project_point(&poly, xi).1).abs();
                let sep = pair.violation(xi) / pair.gamma.norm_f64();
                Ok((dist_err, sep))
            })
            .collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
        let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        let min_sep = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        ensure(worst <= 1e-4, || format!("n={}: distance disagreement {worst:e}", p.n))?;
        ensure(min_sep >= 1e-6, || format!("n={}: weakest separation {min_sep:e}·‖γ‖", p.n))?;
        parts.push(format!("n={} max |Δdist| {worst:.1e}, min separation {min_sep:.2}·‖γ‖", p.n));
    }
    Ok(format!("50 probes each: {}", parts.join("; ")))
}

fn a6() -> Outcome {
    let mut faces = 0;
    for (f, r) in [(RootFamily::A, 1), (RootFamily::A, 2), (RootFamily::A, 3), (RootFamily::B, 2), (RootFamily::C, 2)] {
        let rs = build_root_system(f, r).map_err(|e| e.to_string())?;
        for a in &rs.roots {
            let h = coroot(&rs, a).map_err(|e| e.to_string())?;
            for i in 0..rs.dim {
                let x = RationalVector::unit(rs.dim, i);
                ensure(rs.form(&h, &x) == a.dot(&x), || format!("{f}{r}: coroot identity fails for {a}"))?;
            }
            ensure(a.dot(&h).is_positive(), || format!("{f}{r}: ⟨α, h_α⟩ ≤ 0 for {a}"))?;
        }
        for face in rs.faces() {
            faces += 1;
            let g = gamma_s(&rs, &face);
            for a in &face.sigma_plus_s {
                ensure(a.dot(&g).is_negative(), || format!("{f}{r}: ⟨α, γ_s⟩ ≥ 0 for {a} on {face:?}"))?;
            }
            for x in face.span_basis(&rs) {
                ensure(g.dot(&x).is_zero(), || format!("{f}{r}: γ_s not orthogonal to the face"))?;
            }
        }
    }
    Ok(format!("coroot identity and γ_s negativity exact on {faces} faces of A1, A2, A3, B2, C2"))
}

fn a7() -> Outcome {
    let p = OrbitProblem::from_ints(&[&[2, 1, 0], &[1, 0, -1]], Mode::Real).unwrap();
    let controls = FlowControls { step: 1e-3, tol: 0.0, max_steps: 1000, shrink_factor: 0.5, grow_factor: 1.0 };
    let starts: Vec<RealPoint> = sample(&p, 77, 20);
    let runs: Vec<(usize, f64)> = starts
        .par_iter()
        .map(|z| {
            let r = kirwan_flow(&p, &z.to_complex(), &controls);
            (r.steps, r.max_imag)
        })
        .collect();
    let min_steps = runs.iter().map(|r| r.0).min().unwrap_or(0);
    let imag = runs.iter().map(|r| r.1).fold(0.0, f64::max);
    ensure(min_steps >= 1000, || format!("a run stopped after {min_steps} steps"))?;
    ensure(imag <= 1e-12, || format!("imaginary part {imag:e}"))?;
    Ok(format!("20 runs x {min_steps} steps, max imaginary part {imag:.1e}"))
}

fn a8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for draw in 0..100u64 {
        let n = rng.random_range(2..=4);
        let k = rng.random_range(1..=3);
        let spectra: Vec<Vec<i64>> = (0..k)
            .map(|_| {
                let mut v: Vec<i64> = Vec::new();
                while v.len() < n {
                    let x = rng.random_range(-5..=5);
                    if !v.contains(&x) {
                        v.push(x);
                    }
                }
                v.sort_by(|a, b| b.cmp(a));
                v
            })
            .collect();
        let refs: Vec<&[i64]> = spectra.iter().map(Vec::as_slice).collect();
        let p = OrbitProblem::from_ints(&refs, Mode::Real).map_err(|e| e.to_string())?;
        let z: RealPoint = sample_one(&p, 800 + draw, 0, Sampler::Haar);
        let x = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let plus = g_action(&p, &(&x * h).exp(), &z).map_err(|e| e.to_string())?;
        let minus = g_action(&p, &(&x * -h).exp(), &z).map_err(|e| e.to_string())?;
        let analytic = tangent_action(&p, &x, &z).map_err(|e| e.to_string())?;
        let (mut num, mut den) = (0.0, 0.0);
        for ((a, b), t) in plus.matrices.iter().zip(&minus.matrices).zip(&analytic) {
            let fd = (a - b) / (2.0 * h);
            num += (fd - t).norm_squared();
            den += t.norm_squared();
        }
        let rel = (num / den.max(1e-300)).sqrt();
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-6, || format!("relative error {worst:e}"))?;
    Ok(format!("100 draws, n <= 4, max relative error {worst:.1e}"))
}

fn a9() -> Outcome {
    let p = horn2();
    let opts = PairOptions::default();
    let comp = |g: &[i64], assignments: Vec<Vec<usize>>| -> ComponentDescriptor {
        let gamma = rv(g);
        let blocks = fixed_components(&p, &gamma, 100).unwrap()[0].blocks.clone();
        ComponentDescriptor { gamma, blocks, assignments }
    };
    let test = |c: &ComponentDescriptor| {
        infinitesimal_pair_test(&p, c, opts.trials, opts.rank_tol, 0).map_err(|e| e.to_string())
    };
    let (ok, w, _) = test(&comp(&[1, 0], vec![vec![0, 1], vec![1, 0]]))?;
    ensure(ok && w.dims_matched, || format!("(e, swap) rejected: {w:?}"))?;
    let (ok, w, _) = test(&comp(&[1, 0], vec![vec![0, 1], vec![0, 1]]))?;
    ensure(!ok && !w.dims_matched, || format!("(e, e) not rejected by the dimension count: {w:?}"))?;
    let (dn, dt) = (w.dim_n, w.dim_t);
    for g in [[1, 0], [0, 1], [-1, 1], [1, -1]] {
        let g2 = [2 * g[0], 2 * g[1]];
        let a: Vec<bool> = fixed_components(&p, &rv(&g), 100)
            .unwrap()
            .iter()
            .map(|c| test(c).map(|t| t.0))
            .collect::<Result<_, _>>()?;
        let b: Vec<bool> = fixed_components(&p, &rv(&g2), 100)
            .unwrap()
            .iter()
            .map(|c| test(c).map(|t| t.0))
            .collect::<Result<_, _>>()?;
        ensure(a == b, || format!("γ = {g:?}: {a:?} vs 2γ: {b:?}"))?;
    }
    Ok(format!("(e,swap) accepted, (e,e) rejected (dims {dn} vs {dt}), invariant under γ -> 2γ"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] =
        [("A1", a1), ("A2", a2), ("A3", a3), ("A4", a4), ("A5", a5), ("A6", a6), ("A7", a7), ("A8", a8), ("A9", a9)];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("{name} PASS {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{name} FAIL {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
