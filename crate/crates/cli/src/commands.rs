use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use rmp_core::flow::{kirwan_flow, shifted_flow, FlowResult};
use rmp_core::lie::parse_rational;
use rmp_core::linalg::Scalar;
use rmp_core::orbit::{sample_chamber, sample_one, Mode, OrbitProblem};
use rmp_core::polytope::{hull_from_points, membership, project_point, Polytope};
use rmp_core::ressayre::{
    dim_p_z, exhaustive_pairs, generate_affine_pairs, generate_facet_pairs, generate_gamma_s_pairs,
    generate_projection_pair, verify_theorem,
};

use crate::config::ExperimentConfig;
use crate::output::{csv_text, fmt_f64, Writer};

/// Whether every enabled check of a command met its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

fn chamber_header(n: usize) -> Vec<String> {
    std::iter::once("seed_index".to_string()).chain((1..=n).map(|i| format!("c{i}"))).collect()
}

fn sampled_hull(cfg: &ExperimentConfig, p: &OrbitProblem) -> Result<(Vec<Vec<f64>>, Polytope)> {
    let s = &cfg.sampling;
    if s.count == 0 {
        bail!("sampling.count must be positive");
    }
    let cloud = sample_chamber(p, s.seed, s.count, s.sampler);
    let poly = hull_from_points(&cloud, cfg.verify_options().hull_tol * p.scale())?;
    Ok((cloud, poly))
}

pub fn sample(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = cfg.problem()?;
    let s = &cfg.sampling;
    let cloud = sample_chamber(&p, s.seed, s.count, s.sampler);
    let mut w = Writer::new(&cfg.output.dir)?;
    if cfg.wants("csv") {
        let name = match p.mode {
            Mode::Real => "samples.csv",
            Mode::Hermitian => "samples_hermitian.csv",
        };
        let rows = cloud
            .iter()
            .enumerate()
            .map(|(i, c)| std::iter::once(i.to_string()).chain(c.iter().map(|x| fmt_f64(*x))).collect());
        w.write(name, &csv_text(&chamber_header(p.n), rows))?;
    }
    w.finish("sample", cfg)?;
    Ok(Outcome::Pass)
}

pub fn hull(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = cfg.problem()?;
    let (cloud, poly) = sampled_hull(cfg, &p)?;
    let mut w = Writer::new(&cfg.output.dir)?;
    if cfg.wants("json") {
        w.write_json("hull.json", &json!({ "samples": cloud.len(), "dim": poly.dim(), "polytope": poly }))?;
    }
    if cfg.wants("csv") {
        let rows = poly
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| std::iter::once(i.to_string()).chain(v.iter().map(|x| fmt_f64(*x))).collect());
        let mut header = chamber_header(p.n);
        header[0] = "vertex".into();
        w.write("hull_vertices.csv", &csv_text(&header, rows))?;
    }
    w.finish("hull", cfg)?;
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct FlowSummary {
    start_index: u64,
    converged: bool,
    steps: usize,
    residual: f64,
    type_vector: Vec<f64>,
    max_imag: f64,
}

fn flow_files<T: Scalar>(cfg: &ExperimentConfig, start: u64, r: &FlowResult<T>) -> Result<Outcome> {
    let mut w = Writer::new(&cfg.output.dir)?;
    if cfg.wants("csv") {
        let rows = r
            .f_trace
            .iter()
            .zip(&r.residual_trace)
            .enumerate()
            .map(|(i, (f, res))| vec![i.to_string(), fmt_f64(*f), fmt_f64(*res)]);
        w.write("flow_trace.csv", &csv_text(&["step".into(), "f".into(), "residual".into()], rows))?;
    }
    if cfg.wants("json") {
        let s = FlowSummary {
            start_index: start,
            converged: r.converged,
            steps: r.steps,
            residual: r.residual,
            type_vector: r.type_vector.clone(),
            max_imag: r.max_imag,
        };
        w.write_json("flow.json", &s)?;
    }
    w.finish("flow", cfg)?;
    Ok(Outcome::from_bool(r.converged))
}

/// Flow from the sample with index `start` of the configured seed.
pub fn flow(cfg: &ExperimentConfig, start: u64) -> Result<Outcome> {
    let p = cfg.problem()?;
    let s = &cfg.sampling;
    match p.mode {
        Mode::Real => {
            let z = sample_one::<f64>(&p, s.seed, start, s.sampler);
            flow_files(cfg, start, &kirwan_flow(&p, &z, &cfg.flow))
        }
        Mode::Hermitian => {
            let z = sample_one::<Complex64>(&p, s.seed, start, s.sampler);
            flow_files(cfg, start, &kirwan_flow(&p, &z, &cfg.flow))
        }
    }
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
        .split(',')
        .map(|t| parse_rational(t).map(|r| rmp_core::lie::rational_to_f64(&r)).map_err(|e| anyhow!(e)))
        .collect()
}

pub fn project(cfg: &ExperimentConfig, xi_text: &str) -> Result<Outcome> {
    let p = cfg.problem()?;
    let xi = parse_vector(xi_text).with_context(|| format!("parsing ξ = `{xi_text}`"))?;
    let sf = shifted_flow(&p.with_mode(Mode::Real), &xi, &cfg.flow, cfg.sampling.seed)?;
    let (_, poly) = sampled_hull(cfg, &p)?;
    let (hull_point, hull_dist) = project_point(&poly, &xi);
    let agreement = (sf.dist - hull_dist).abs();
    let ok = sf.result.converged && agreement <= cfg.thresholds.agreement * p.scale();
    let mut w = Writer::new(&cfg.output.dir)?;
    w.write_json(
        "projection.json",
        &json!({
            "xi": xi,
            "xi_prime": sf.xi_prime,
            "gamma": sf.gamma,
            "dist": sf.dist,
            "converged": sf.result.converged,
            "residual": sf.result.residual,
            "hull_point": hull_point,
            "hull_dist": hull_dist,
            "agreement_with_polytope": agreement,
            "passed": ok,
        }),
    )?;
    w.finish("project", cfg)?;
    Ok(Outcome::from_bool(ok))
}

/// Deterministic exterior probes around the sampled hull, strictly decreasing.
fn probes(poly: &Polytope, count: usize, radius: f64) -> Vec<Vec<f64>> {
    let n = poly.ambient_dim;
    let m = poly.vertices.len() as f64;
    let center: Vec<f64> = (0..n).map(|j| poly.vertices.iter().map(|v| v[j]).sum::<f64>() / m).collect();
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    (0..count)
        .map(|j| {
            let u: Vec<f64> = (0..n).map(|i| (((j + 1) * (i + 2)) as f64 * golden).fract() * 2.0 - 1.0).collect();
            let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            let mut xi: Vec<f64> = center.iter().zip(&u).map(|(c, x)| c + radius * x / norm).collect();
            xi.sort_by(|a, b| b.total_cmp(a));
            for i in 1..n {
                if xi[i] >= xi[i - 1] - 1e-6 * radius {
                    xi[i] = xi[i - 1] - 1e-3 * radius;
                }
            }
            xi
        })
        .collect()
}

pub fn pairs(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p = cfg.problem()?;
    let (_, poly) = sampled_hull(cfg, &p)?;
    let real = p.with_mode(Mode::Real);
    let po = cfg.pair_options();
    let dim_z = dim_p_z(&real, po.dim_budget, po.stabilizer_tol, po.seed)?;
    let mut pairs = generate_gamma_s_pairs(&real, &poly, dim_z, &po)?;
    let (affine, mut warnings) = generate_affine_pairs(&real, &poly, dim_z, &po)?;
    pairs.extend(affine);
    let offset = pairs.len();
    let (facet_pairs, mut facets) = generate_facet_pairs(&real, &poly, dim_z, &po)?;
    for f in facets.iter_mut() {
        f.pair = f.pair.map(|i| i + offset);
    }
    pairs.extend(facet_pairs);
    if cfg.ressayre.exhaustive {
        pairs.extend(exhaustive_pairs(&real, dim_z, &po)?);
    }

    let mut probe_rows = Vec::new();
    for xi in probes(&poly, cfg.ressayre.probe_count, 2.0 * p.scale()) {
        if membership(&poly, &xi, cfg.thresholds.membership * p.scale()).0 {
            continue;
        }
        match generate_projection_pair(&real, Some(&poly), &xi, dim_z, &po) {
            Ok((pair, sf)) => {
                probe_rows.push(json!({ "xi": xi, "dist": sf.dist, "pair": pairs.len() }));
                pairs.push(pair);
            }
            Err(e) => {
                warnings.push(format!("probe {xi:?}: {e}"));
                probe_rows.push(json!({ "xi": xi, "error": e.to_string() }));
            }
        }
    }

    let mut w = Writer::new(&cfg.output.dir)?;
    w.write_json(
        "pairs.json",
        &json!({
            "dim_z": dim_z,
            "pairs": pairs,
            "facets": facets,
            "probes": probe_rows,
            "warnings": warnings,
        }),
    )?;
    w.finish("pairs", cfg)?;
    Ok(Outcome::Pass)
}

fn stage_of(e: &rmp_core::Error) -> &'static str {
    match e {
        rmp_core::Error::Stage { stage, .. } => stage,
        _ => "verify",
    }
}

pub fn verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut w = Writer::new(&cfg.output.dir)?;
    let p = match cfg.problem() {
        Ok(p) => p,
        Err(e) => {
            w.write_json("report.json", &json!({ "stage": "config", "error": format!("{e:#}"), "passed": false }))?;
            return Err(e);
        }
    };
    let report = match verify_theorem(&p, &cfg.verify_options()) {
        Ok(r) => r,
        Err(e) => {
            w.write_json("report.json", &json!({ "stage": stage_of(&e), "error": e.to_string(), "passed": false }))?;
            w.finish("verify", cfg)?;
            return Err(e.into());
        }
    };
    let passed = report.passed();
    let mut v = serde_json::to_value(&report)?;
    if let Value::Object(m) = &mut v {
        m.insert("stage".into(), Value::Null);
        m.insert("passed".into(), Value::Bool(passed));
        m.insert("thresholds".into(), serde_json::to_value(&cfg.thresholds)?);
    }
    w.write_json("report.json", &v)?;
    w.write_json("inequalities.json", &report.system)?;
    w.finish("verify", cfg)?;
    Ok(Outcome::from_bool(passed))
}

/// Prints a summary of `report.json` in `dir`.
pub fn report(dir: &Path) -> Result<Outcome> {
    let path = dir.join("report.json");
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text)?;
    if let Some(stage) = v.get("stage").and_then(Value::as_str) {
        println!("failed in stage `{stage}`: {}", v["error"].as_str().unwrap_or("?"));
        return Ok(Outcome::Fail);
    }
    let num = |k: &str| v[k].as_f64().map_or("n/a".to_string(), |x| format!("{x:.3e}"));
    println!("samples            {}", v["samples"]);
    println!("polytope dim       {}", v["polytope_dim"]);
    println!("dim_p Z            {}", v["dim_z"]);
    println!("pairs              {}", v["pairs"].as_array().map_or(0, Vec::len));
    let sys = &v["system"];
    println!("equalities         {}", sys["equalities"].as_array().map_or(0, Vec::len));
    if let Some(ineqs) = sys["inequalities"].as_array() {
        let nontrivial = ineqs.iter().filter(|i| i["chamber"] == Value::Bool(false)).count();
        println!("inequalities       {} ({} non-trivial)", ineqs.len(), nontrivial);
    }
    println!("soundness          {}", num("soundness_violation"));
    println!("hausdorff          {}", num("hausdorff"));
    for k in ["sound", "tight", "complete", "certified"] {
        println!("{k:<18} {}", v[k]);
    }
    let passed = v["passed"].as_bool().unwrap_or(false);
    println!("passed             {passed}");
    Ok(Outcome::from_bool(passed))
}
