//! Experiment configuration, read from a single JSON document.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use robust_submod_core::satsim::{ScenarioConfig, WalkerDelta};
use robust_submod_core::SampleSize;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Satsel,
    Swp,
    Online,
    Imgsum,
    Verify,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Satsel => "satsel",
            Suite::Swp => "swp",
            Suite::Online => "online",
            Suite::Imgsum => "imgsum",
            Suite::Verify => "verify",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "satsel" => Ok(Suite::Satsel),
            "swp" => Ok(Suite::Swp),
            "online" => Ok(Suite::Online),
            "imgsum" => Ok(Suite::Imgsum),
            "verify" => Ok(Suite::Verify),
            other => Err(CliError::Config(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub k: usize,
    pub lambda: f64,
    /// Stochastic-greedy accuracy; ignored when `sample_size` is set.
    pub epsilon: f64,
    pub sample_size: Option<usize>,
    pub alpha: f64,
    pub gamma: f64,
    pub window: usize,
    /// Saturation bisection resolution; `None` stops at `1/n`.
    pub resolution: Option<f64>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            k: 10,
            lambda: 0.1,
            epsilon: 0.1,
            sample_size: Some(24),
            alpha: 1.0,
            gamma: 0.5,
            window: 5,
            resolution: Some(1e-3),
        }
    }
}

impl SolverParams {
    pub fn sample(&self) -> SampleSize {
        match self.sample_size {
            Some(r) => SampleSize::Fixed(r),
            None => SampleSize::Epsilon(self.epsilon),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub inclination_deg: f64,
    pub total: usize,
    pub planes: usize,
    pub phasing: usize,
    pub semi_major_axis: f64,
    pub fov_half_angle: f64,
    pub steps: usize,
    pub step_seconds: f64,
    pub lorenz_dt: f64,
    pub process_noise: f64,
    pub measurement_noise: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        let base = ScenarioConfig::default();
        ScenarioParams {
            inclination_deg: 75.0,
            total: 240,
            planes: 12,
            phasing: 1,
            semi_major_axis: base.constellation.semi_major_axis,
            fov_half_angle: base.constellation.fov_half_angle,
            steps: base.horizon,
            step_seconds: base.step_seconds,
            lorenz_dt: base.lorenz_dt,
            process_noise: base.process_noise,
            measurement_noise: base.measurement_noise,
        }
    }
}

impl ScenarioParams {
    pub fn scenario(&self, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            constellation: WalkerDelta {
                semi_major_axis: self.semi_major_axis,
                fov_half_angle: self.fov_half_angle,
                ..WalkerDelta::pattern(self.inclination_deg, self.total, self.planes, self.phasing)
            },
            horizon: self.steps,
            step_seconds: self.step_seconds,
            lorenz_dt: self.lorenz_dt,
            process_noise: self.process_noise,
            measurement_noise: self.measurement_noise,
            seed,
            ..ScenarioConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImgsumParams {
    pub images: usize,
    pub dim: usize,
    pub k_values: Vec<usize>,
    /// Headerless CSV of embeddings; synthetic embeddings are used when absent.
    pub embeddings: Option<PathBuf>,
}

impl Default for ImgsumParams {
    fn default() -> Self {
        ImgsumParams { images: 819, dim: 64, k_values: (2..=12).collect(), embeddings: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Option<Suite>,
    pub runs: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Smaller property battery for `verify`.
    pub quick: bool,
    pub solver: SolverParams,
    pub scenario: ScenarioParams,
    pub imgsum: ImgsumParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite: None,
            runs: 15,
            seed: 0,
            out_dir: PathBuf::from("results"),
            quick: false,
            solver: SolverParams::default(),
            scenario: ScenarioParams::default(),
            imgsum: ImgsumParams::default(),
        }
    }
}

impl ExperimentConfig {
    /// Defaults of `suite` at the scale of the original experiments.
    pub fn for_suite(suite: Suite) -> Self {
        let mut c = ExperimentConfig { suite: Some(suite), ..Default::default() };
        if suite == Suite::Imgsum {
            c.solver.sample_size = None;
        }
        c
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn suite(&self) -> CliResult<Suite> {
        self.suite.ok_or_else(|| CliError::Config("no suite selected".into()))
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let s = &self.solver;
        if self.runs == 0 {
            return bad("runs must be positive".into());
        }
        if s.k == 0 {
            return bad("k must be positive".into());
        }
        if !(s.lambda > 0.0 && s.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", s.lambda));
        }
        if s.sample_size.is_none() && !(s.epsilon > 0.0 && s.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", s.epsilon));
        }
        if s.sample_size == Some(0) {
            return bad("sample_size must be positive".into());
        }
        if !(s.alpha >= 1.0) {
            return bad(format!("alpha must be at least 1, got {}", s.alpha));
        }
        if !(0.0..=1.0).contains(&s.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", s.gamma));
        }
        if matches!(s.resolution, Some(r) if !(r > 0.0 && r.is_finite())) {
            return bad("resolution must be positive".into());
        }
        if s.window == 0 {
            return bad("window must be positive".into());
        }
        match self.suite()? {
            Suite::Satsel | Suite::Swp | Suite::Online => {
                self.scenario.scenario(self.seed).validate().map_err(|e| CliError::Config(e.to_string()))?;
                if s.k > self.scenario.total {
                    return bad(format!("k = {} exceeds the {} satellites", s.k, self.scenario.total));
                }
                if self.suite()? == Suite::Online && self.scenario.steps < s.window {
                    return bad("the online horizon must cover at least one window".into());
                }
            }
            Suite::Imgsum => {
                let m = &self.imgsum;
                if m.embeddings.is_none() && (m.images < 2 || m.dim == 0) {
                    return bad("synthetic embeddings need at least two images and one dimension".into());
                }
                if m.k_values.is_empty() || m.k_values.contains(&0) {
                    return bad("k_values must be nonempty and positive".into());
                }
                if m.embeddings.is_none() && m.k_values.iter().any(|&k| k > m.images) {
                    return bad("every k must be at most the number of images".into());
                }
            }
            Suite::Verify => {}
        }
        Ok(())
    }
}
