use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const HORN2: &str = r#"{"problem": {"n": 2, "k": 2, "spectra": [["1", "0"], ["1", "0"]]},
  "sampling": {"seed": 0, "count": 4000}}"#;

fn rmp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmp")).args(args).output().unwrap()
}

fn setup(config: &str) -> (tempfile::TempDir, String, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let (c, o) = (cfg.to_str().unwrap().to_string(), out.to_str().unwrap().to_string());
    (dir, c, o)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn horn_two_verifies() {
    let (_d, cfg, out) = setup(HORN2);
    let r = rmp(&["verify", "--config", &cfg, "--out", &out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let report = read_json(&Path::new(&out).join("report.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["stage"], Value::Null);
    let ineqs = read_json(&Path::new(&out).join("inequalities.json"));
    assert_eq!(ineqs["equalities"].as_array().unwrap().len(), 1);
    assert_eq!(ineqs["equalities"][0]["normal"], serde_json::json!(["1", "1"]));
    assert_eq!(ineqs["equalities"][0]["value"], "2");
    let nontrivial = ineqs["inequalities"].as_array().unwrap().iter().filter(|i| i["chamber"] == false).count();
    assert_eq!(nontrivial, 1);

    let r = rmp(&["report", "--out", &out]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stdout).contains("passed             true"));
}

#[test]
fn under_sampling_exits_one() {
    let cfg = r#"{"problem": {"n": 3, "k": 2, "spectra": [["2", "1", "0"], ["2", "1", "0"]]},
      "sampling": {"seed": 0, "count": 10, "sampler": {"kind": "haar"}}}"#;
    let (_d, cfg, out) = setup(cfg);
    let r = rmp(&["verify", "--config", &cfg, "--out", &out]);
    assert_eq!(r.status.code(), Some(1));
    let report = read_json(&Path::new(&out).join("report.json"));
    assert_eq!(report["sound"], true);
    assert_eq!(report["complete"], false);
}

#[test]
fn single_factor_is_a_point() {
    let cfg = r#"{"problem": {"n": 3, "k": 1, "spectra": [["2", "1/2", "-1"]]}, "sampling": {"count": 50}}"#;
    let (_d, cfg, out) = setup(cfg);
    let r = rmp(&["verify", "--config", &cfg, "--out", &out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(read_json(&Path::new(&out).join("report.json"))["polytope_dim"], 0);
}

#[test]
fn sampling_is_byte_identical() {
    let (_d, cfg, out) = setup(HORN2);
    let path = Path::new(&out).join("samples.csv");
    assert_eq!(rmp(&["sample", "--config", &cfg, "--out", &out]).status.code(), Some(0));
    let first = fs::read(&path).unwrap();
    let manifest = fs::read(Path::new(&out).join("manifest.json")).unwrap();
    assert_eq!(rmp(&["sample", "--config", &cfg, "--out", &out]).status.code(), Some(0));
    assert_eq!(first, fs::read(&path).unwrap());
    assert_eq!(manifest, fs::read(Path::new(&out).join("manifest.json")).unwrap());

    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "seed_index,c1,c2");
    assert_eq!(lines.len(), 4001);

    assert_eq!(rmp(&["sample", "--config", &cfg, "--out", &out, "--seed", "1"]).status.code(), Some(0));
    assert_ne!(text.as_bytes(), fs::read(&path).unwrap());
}

#[test]
fn hermitian_samples_get_their_own_file() {
    let (_d, cfg, out) = setup(HORN2);
    let r = rmp(&["sample", "--config", &cfg, "--out", &out, "--mode", "hermitian"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(Path::new(&out).join("samples_hermitian.csv").exists());
    assert!(!Path::new(&out).join("samples.csv").exists());
}

#[test]
fn projection_of_an_exterior_point() {
    let (_d, cfg, out) = setup(HORN2);
    let r = rmp(&["project", "--config", &cfg, "--out", &out, "--xi", "3,-1"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v = read_json(&Path::new(&out).join("projection.json"));
    assert!((v["dist"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert!(v["agreement_with_polytope"].as_f64().unwrap() <= 1e-4);
    let xp: Vec<f64> = v["xi_prime"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((xp[0] - 2.0).abs() < 1e-6 && xp[1].abs() < 1e-6);
}

#[test]
fn projection_of_an_interior_point() {
    let (_d, cfg, out) = setup(HORN2);
    let r = rmp(&["project", "--config", &cfg, "--out", &out, "--xi", "3/2,1/2"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v = read_json(&Path::new(&out).join("projection.json"));
    assert!(v["dist"].as_f64().unwrap() <= 1e-5);
    for g in v["gamma"].as_array().unwrap() {
        assert!(g.as_f64().unwrap().abs() <= 1e-5);
    }
}

#[test]
fn stationary_flow_has_one_row() {
    let cfg = r#"{"problem": {"n": 2, "k": 1, "spectra": [["1", "0"]]}}"#;
    let (_d, cfg, out) = setup(cfg);
    let r = rmp(&["flow", "--config", &cfg, "--out", &out, "--start", "5"]);
    assert_eq!(r.status.code(), Some(0));
    let trace = fs::read_to_string(Path::new(&out).join("flow_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    assert!(trace.starts_with("step,f,residual\n0,"));
}

#[test]
fn pairs_include_probes() {
    let (_d, cfg, out) = setup(HORN2);
    let r = rmp(&["pairs", "--config", &cfg, "--out", &out]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let v = read_json(&Path::new(&out).join("pairs.json"));
    assert_eq!(v["dim_z"], 1);
    let pairs = v["pairs"].as_array().unwrap();
    let probes = v["probes"].as_array().unwrap();
    assert!(!probes.is_empty());
    for pr in probes {
        let i = pr["pair"].as_u64().unwrap() as usize;
        assert_eq!(pairs[i]["provenance"], "projection");
    }
}

#[test]
fn errors_exit_two_with_stage() {
    let bad = r#"{"problem": {"n": 2, "k": 1, "spectra": [["0", "1"]]}}"#;
    let (_d, cfg, out) = setup(bad);
    let r = rmp(&["verify", "--config", &cfg, "--out", &out]);
    assert_eq!(r.status.code(), Some(2));
    let report = read_json(&Path::new(&out).join("report.json"));
    assert_eq!(report["stage"], "config");
    assert_eq!(rmp(&["report", "--out", &out]).status.code(), Some(1));

    let zero = r#"{"problem": {"n": 2, "k": 2, "spectra": [["1", "0"], ["1", "0"]]}, "sampling": {"count": 0}}"#;
    let (_d, cfg, out) = setup(zero);
    assert_eq!(rmp(&["verify", "--config", &cfg, "--out", &out]).status.code(), Some(2));
    assert_eq!(read_json(&Path::new(&out).join("report.json"))["stage"], "sample");

    assert_eq!(rmp(&["sample", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
}
