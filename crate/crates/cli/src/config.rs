use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use rmp_core::flow::FlowControls;
use rmp_core::lie::RationalVector;
use rmp_core::orbit::{Mode, OrbitProblem, Sampler};
use rmp_core::ressayre::{PairOptions, VerifyOptions};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub flow: FlowControls,
    #[serde(default)]
    pub ressayre: RessayreConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub n: usize,
    pub k: usize,
    /// One spectrum per factor, entries as `"p/q"`, integers or decimals.
    pub spectra: Vec<Vec<String>>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
}

fn default_mode() -> Mode {
    Mode::Real
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub seed: u64,
    pub count: usize,
    pub sampler: Sampler,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { seed: 0, count: 10_000, sampler: Sampler::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RessayreConfig {
    pub trials: usize,
    pub rank_tol: f64,
    /// Exterior probes fed to the projection family by `pairs`.
    pub probe_count: usize,
    pub exhaustive: bool,
}

impl Default for RessayreConfig {
    fn default() -> Self {
        let d = PairOptions::default();
        RessayreConfig { trials: d.trials, rank_tol: d.rank_tol, probe_count: 8, exhaustive: false }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), formats: vec!["csv".into(), "json".into()] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Largest allowed violation of the emitted system by a sample.
    pub membership: f64,
    pub hausdorff: f64,
    /// Slack under which a non-trivial inequality counts as attained.
    pub tightness: f64,
    /// Allowed gap between the flow distance and the sampled-hull distance.
    pub agreement: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { membership: 1e-8, hausdorff: 1e-2, tightness: 1e-3, agreement: 1e-4 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    /// Checks the declared shape against the spectra and builds the problem.
    pub fn problem(&self) -> Result<OrbitProblem> {
        let pc = &self.problem;
        if pc.spectra.len() != pc.k {
            bail!("problem.k = {} but {} spectra given", pc.k, pc.spectra.len());
        }
        if let Some(s) = pc.spectra.iter().find(|s| s.len() != pc.n) {
            bail!("problem.n = {} but a spectrum has {} entries", pc.n, s.len());
        }
        let spectra = pc.spectra.iter().map(|s| RationalVector::parse(s)).collect::<rmp_core::Result<Vec<_>>>()?;
        let p = OrbitProblem::new(spectra, pc.mode)?;
        self.flow.validate()?;
        Ok(p)
    }

    pub fn pair_options(&self) -> PairOptions {
        PairOptions {
            trials: self.ressayre.trials,
            rank_tol: self.ressayre.rank_tol,
            seed: self.sampling.seed,
            flow: self.flow,
            ..PairOptions::default()
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            seed: self.sampling.seed,
            samples: self.sampling.count,
            sampler: self.sampling.sampler,
            soundness_tol: self.thresholds.membership,
            hausdorff_tol: self.thresholds.hausdorff,
            tightness_tol: self.thresholds.tightness,
            exhaustive: self.ressayre.exhaustive,
            pairs: self.pair_options(),
            ..VerifyOptions::default()
        }
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f.eq_ignore_ascii_case(format))
    }
}
