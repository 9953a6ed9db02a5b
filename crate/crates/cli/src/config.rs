//! Experiment configuration (TOML).
//!
//! ```toml
//! repetitions = 5          # default 1
//! seed = 0                 # repetition r uses seed + r
//! output_dir = "out"       # default "gradem-out"
//! reseed_data = true       # regenerate data per repetition
//!
//! [data]                   # source = "generate" takes GenSpec fields
//! source = "generate"
//! kind = "generative-mlr"
//! k = 2
//! d = 4
//! n = 4000
//!
//! [loss]
//! family = "ridge-squared"
//! lambda = 1e-3
//!
//! [em]
//! beta = 10.0              # or "inf"
//! iterations = 20
//! resample = true          # step_size defaults to 1/(2M)
//!
//! [init]
//! type = "perturb-reference"
//! c_ini = 0.2
//! ```

use std::path::PathBuf;

use gradem_core::theory::ReferenceSearch;
use gradem_core::{Beta, GenSpec, Link, LossFamily, LossModel, ParamSet, SoftMinConfig, TieRule};
use serde::{Deserialize, Serialize};

/// Top-level keys that have no default.
pub const REQUIRED_FIELDS: [&str; 4] = ["data", "loss", "em", "init"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("missing required fields: {}", .0.join(", "))]
    Missing(Vec<&'static str>),
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_true")]
    pub reseed_data: bool,
    pub data: DataConfig,
    pub loss: LossSpec,
    pub em: EmSpec,
    pub init: InitConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub theory: TheoryConfig,
}

fn default_repetitions() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("gradem-out")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum DataConfig {
    Generate(GenSpec),
    /// `.csv` or line records.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    pub family: LossFamily,
    pub lambda: f64,
    #[serde(default)]
    pub link: Link,
    #[serde(default = "default_radius", with = "gradem_core::serde_float")]
    pub domain_radius: f64,
}

fn default_radius() -> f64 {
    f64::INFINITY
}

impl LossSpec {
    pub fn build(&self) -> gradem_core::Result<LossModel> {
        LossModel::new(self.family, self.lambda)?
            .with_link(self.link)?
            .with_domain_radius(self.domain_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmSpec {
    pub beta: Beta,
    pub iterations: usize,
    /// `1/(2M)` from the certified smoothness when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    #[serde(default)]
    pub resample: bool,
    #[serde(default)]
    pub tie_rule: TieRule,
}

impl EmSpec {
    pub fn softmin(&self) -> SoftMinConfig {
        SoftMinConfig {
            beta: self.beta,
            tie_rule: self.tie_rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitConfig {
    /// Each component at distance `c_ini‖θ*_j‖` from the reference.
    PerturbReference {
        c_ini: f64,
    },
    Explicit {
        params: ParamSet,
    },
    RandomBall {
        radius: f64,
    },
}

/// What distances are measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReferenceConfig {
    /// The generating parameters of a synthetic dataset.
    #[default]
    Truth,
    Explicit {
        params: ParamSet,
    },
    /// Best end point of multi-start full-data gradient EM started around
    /// `hint` (the truth when absent).
    Minimize {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hint: Option<ParamSet>,
        #[serde(default = "default_restarts")]
        restarts: usize,
        #[serde(default = "default_max_iterations")]
        max_iterations: usize,
        /// The run's step size when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step_size: Option<f64>,
        #[serde(default = "default_spread")]
        spread: f64,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
}

fn default_restarts() -> usize {
    ReferenceSearch::default().restarts
}

fn default_max_iterations() -> usize {
    ReferenceSearch::default().max_iterations
}

fn default_spread() -> f64 {
    ReferenceSearch::default().spread
}

fn default_tolerance() -> f64 {
    ReferenceSearch::default().tolerance
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default)]
    pub lemmas: bool,
    #[serde(default = "default_lemma_trials")]
    pub lemma_trials: usize,
    #[serde(default)]
    pub decomposition: bool,
    #[serde(default)]
    pub gradient_oracle: bool,
    #[serde(default = "default_gradient_samples")]
    pub gradient_samples: usize,
    #[serde(default)]
    pub brute_force: bool,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_grid_radius")]
    pub grid_radius: f64,
}

fn default_lemma_trials() -> usize {
    100
}

fn default_gradient_samples() -> usize {
    100
}

fn default_grid_points() -> usize {
    201
}

fn default_grid_radius() -> f64 {
    2.0
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            lemmas: false,
            lemma_trials: default_lemma_trials(),
            decomposition: false,
            gradient_oracle: false,
            gradient_samples: default_gradient_samples(),
            brute_force: false,
            grid_points: default_grid_points(),
            grid_radius: default_grid_radius(),
        }
    }
}

/// Which closed form a repetition's final distance is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BoundForm {
    /// `r^T d₀ + ζ(1 − r^T)/(1 − r)`
    #[default]
    Recursion,
    /// `r^T d₀ + ζ/(1 − r)`
    Asymptotic,
    /// `r^T d₀ + ζ`
    Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryConfig {
    #[serde(default = "default_c_universal")]
    pub c_universal: f64,
    #[serde(default)]
    pub bound: BoundForm,
}

fn default_c_universal() -> f64 {
    1.0
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            c_universal: default_c_universal(),
            bound: BoundForm::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if let DataConfig::Generate(spec) = &self.data {
            spec.validate()
                .map_err(|e| ConfigError::Invalid(format!("data: {e}")))?;
        }
        self.loss
            .build()
            .map_err(|e| ConfigError::Invalid(format!("loss: {e}")))?;
        if self.em.iterations == 0 {
            return bad("em.iterations must be at least 1".into());
        }
        if let Some(g) = self.em.step_size {
            if !(g.is_finite() && g >= 0.0) {
                return bad(format!("em.step_size must be >= 0, got {g}"));
            }
        }
        match &self.init {
            InitConfig::PerturbReference { c_ini } => {
                if !(*c_ini > 0.0 && *c_ini < 1.0) {
                    return bad(format!("init.c_ini must lie in (0, 1), got {c_ini}"));
                }
            }
            InitConfig::RandomBall { radius } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return bad(format!("init.radius must be >= 0, got {radius}"));
                }
            }
            InitConfig::Explicit { .. } => {}
        }
        if matches!(self.data, DataConfig::File { .. }) && self.reference == ReferenceConfig::Truth
        {
            return bad("a file dataset has no truth; set reference.type".into());
        }
        if self.checks.grid_points == 0
            || self.checks.grid_radius.is_nan()
            || self.checks.grid_radius <= 0.0
        {
            return bad("checks.grid_points and checks.grid_radius must be positive".into());
        }
        if !(self.theory.c_universal.is_finite() && self.theory.c_universal > 0.0) {
            return bad("theory.c_universal must be positive".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }
}

/// Parses and validates a config document.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text.parse()?;
    let missing: Vec<&'static str> = REQUIRED_FIELDS
        .iter()
        .copied()
        .filter(|k| !table.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }
    let config: ExperimentConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

/// Help text listing every key and its default.
pub const CONFIG_HELP: &str = "\
Config keys (TOML):
  repetitions = 1            number of repetitions; repetition r uses seed + r
  seed = 0                   base seed
  output_dir = \"gradem-out\"  where report.json, trace.csv, plot.csv go
  reseed_data = true         regenerate synthetic data for every repetition
  [data]     source = \"generate\" with kind, k, d, n, noise_sigma = 0,
             mix_weights = uniform, covariate = {type = \"gaussian\"}, seed = 0,
             truth = unit sphere draw, margin = 0, perturbation = 0, clip = none;
             or source = \"file\", path = \"data.csv\" | \"data.jsonl\"
  [loss]     family (ridge-squared | reg-logistic | squared-hinge-svm | reg-glm | hinge),
             lambda, link = {type = \"identity\"}, domain_radius = inf
  [em]       beta (number or \"inf\"), iterations, step_size = 1/(2M),
             resample = false, tie_rule = \"lowest-index\"
  [init]     type = \"perturb-reference\", c_ini in (0,1)
             | type = \"explicit\", params = [[...], ...]
             | type = \"random-ball\", radius
  [reference] type = \"truth\" (default) | \"explicit\" with params
             | \"minimize\" with hint = truth, restarts = 16, max_iterations = 5000,
               step_size = run step, spread = 0.5, tolerance = 1e-13
  [checks]   lemmas = false, lemma_trials = 100, decomposition = false,
             gradient_oracle = false, gradient_samples = 100, brute_force = false,
             grid_points = 201, grid_radius = 2
  [theory]   c_universal = 1, bound = \"recursion\" | \"asymptotic\" | \"summary\"
Environment: GRADEM_WORKERS sets the number of worker threads.";
