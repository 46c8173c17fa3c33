use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cliio::CsvDatasetSchema;
use crate::error::{Error, Result};
use crate::numcore::{Activation, TrainConfig};
use crate::prior::{PenaltyConfig, LAMBDA_GRID};
use crate::shiftlab::ShiftSpec;

pub const DEFAULT_RATIOS: [f64; 3] = [0.05, 0.1, 0.5];
pub const DEFAULT_FOLDS: [usize; 3] = [2, 5, 10];
pub const DEFAULT_NOISE_STDS: [f64; 6] = [1.0, 10.0, 25.0, 50.0, 75.0, 100.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Integral baseline and fragmented st-CV per batch ratio.
    E1,
    /// Fragmented st-CV and FICsR per batch ratio.
    E2,
    /// Integral baseline and st-CV k-fold per fold count.
    E3,
    /// st-CV and FICsR k-fold per fold count.
    E4,
    LambdaSweep,
    NoiseAblation,
    BenchmarkBaselines,
}

impl Protocol {
    pub const ALL: [Protocol; 7] = [
        Protocol::E1,
        Protocol::E2,
        Protocol::E3,
        Protocol::E4,
        Protocol::LambdaSweep,
        Protocol::NoiseAblation,
        Protocol::BenchmarkBaselines,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::E1 => "e1",
            Protocol::E2 => "e2",
            Protocol::E3 => "e3",
            Protocol::E4 => "e4",
            Protocol::LambdaSweep => "lambda_sweep",
            Protocol::NoiseAblation => "noise_ablation",
            Protocol::BenchmarkBaselines => "benchmark_baselines",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    StCv,
    Ficsr,
    Erm,
    Iwerm,
    Eiwerm,
    Riwerm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::StCv => "st_cv",
            Method::Ficsr => "ficsr",
            Method::Erm => "erm",
            Method::Iwerm => "iwerm",
            Method::Eiwerm => "eiwerm",
            Method::Riwerm => "riwerm",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Two-class Gaussian blobs separated along the first axis.
    Blobs { n: usize, d: usize, class_sep: f64 },
    Csv(CsvDatasetSchema),
    /// Horizontal vs vertical bars on a `size × size` grid; required for `beta_rotation`.
    BarImages { n: usize, size: usize },
}

impl DatasetSource {
    pub fn name(&self) -> String {
        match self {
            DatasetSource::Blobs { .. } => "blobs".into(),
            DatasetSource::BarImages { .. } => "bar_images".into(),
            DatasetSource::Csv(schema) => schema
                .path
                .file_stem()
                .map_or_else(|| "csv".into(), |s| s.to_string_lossy().into_owned()),
        }
    }

    pub(crate) fn resolve_relative(&mut self, base: &std::path::Path) {
        if let DatasetSource::Csv(schema) = self {
            if schema.path.is_relative() {
                schema.path = base.join(&schema.path);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            hidden: vec![4],
            activation: Activation::Relu,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImportanceSettings {
    /// `None` selects the median pairwise distance.
    pub kernel_width: Option<f64>,
    pub ridge: f64,
    /// `None` selects `min(100, n_target)`.
    pub m_centers: Option<usize>,
    /// Exponent applied to uLSIF weights for EIWERM.
    pub flatten_exponent: f64,
    /// RuLSIF mixture for RIWERM.
    pub mixture: f64,
}

impl Default for ImportanceSettings {
    fn default() -> Self {
        Self {
            kernel_width: None,
            ridge: crate::importance::DEFAULT_RIDGE,
            m_centers: None,
            flatten_exponent: 0.5,
            mixture: 0.5,
        }
    }
}

fn default_ratios() -> Vec<f64> {
    DEFAULT_RATIOS.to_vec()
}
fn default_folds() -> Vec<usize> {
    DEFAULT_FOLDS.to_vec()
}
fn default_lambda_grid() -> Vec<f64> {
    LAMBDA_GRID.to_vec()
}
fn default_noise_stds() -> Vec<f64> {
    DEFAULT_NOISE_STDS.to_vec()
}
fn default_methods() -> Vec<Method> {
    vec![Method::Erm, Method::Iwerm, Method::Eiwerm, Method::Riwerm, Method::StCv, Method::Ficsr]
}
fn default_trials() -> usize {
    1
}
fn default_validation_fraction() -> f64 {
    0.2
}
fn yes() -> bool {
    true
}

/// One experiment definition, read from JSON. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub dataset: DatasetSource,
    #[serde(default)]
    pub shift: ShiftSpec,
    /// Batch ratios for batch-wise protocols; the first entry is used where only one applies.
    #[serde(default = "default_ratios")]
    pub ratios: Vec<f64>,
    #[serde(default = "default_folds")]
    pub folds: Vec<usize>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub model: ModelSettings,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    /// Start each fragment after the first at the prior mean.
    #[serde(default = "yes")]
    pub warm_start: bool,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_noise_stds")]
    pub noise_stds: Vec<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub importance: ImportanceSettings,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
    /// Standardize features with statistics of the training split.
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Blobs config with every default filled in.
    pub fn blobs(protocol: Protocol, n: usize, d: usize, class_sep: f64) -> Self {
        Self {
            protocol,
            dataset: DatasetSource::Blobs { n, d, class_sep },
            shift: ShiftSpec::none(),
            ratios: default_ratios(),
            folds: default_folds(),
            train: TrainConfig::default(),
            model: ModelSettings::default(),
            penalty: PenaltyConfig::default(),
            warm_start: true,
            lambda_grid: default_lambda_grid(),
            noise_stds: default_noise_stds(),
            methods: default_methods(),
            importance: ImportanceSettings::default(),
            trials: 1,
            base_seed: 0,
            validation_fraction: default_validation_fraction(),
            standardize: true,
            output_dir: None,
        }
    }

    /// Seed of trial `t`: `base_seed + t`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction must lie in (0, 1), got {}",
                self.validation_fraction
            ));
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return bad("ratios must be a non-empty list of values in (0, 1]".into());
        }
        if self.folds.is_empty() || self.folds.iter().any(|&k| k < 2) {
            return bad("folds must be a non-empty list of counts >= 2".into());
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|&l| !(l >= 0.0)) {
            return bad("lambda_grid must be a non-empty list of values >= 0".into());
        }
        if self.noise_stds.iter().any(|&s| !(s >= 0.0)) {
            return bad("noise_stds must be >= 0".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.model.hidden.iter().any(|&h| h == 0) {
            return bad("hidden layer widths must be positive".into());
        }
        let imp = &self.importance;
        if !(0.0..=1.0).contains(&imp.flatten_exponent) {
            return bad("importance.flatten_exponent must lie in [0, 1]".into());
        }
        if !(imp.mixture >= 0.0 && imp.mixture < 1.0) {
            return bad("importance.mixture must lie in [0, 1)".into());
        }
        if !(imp.ridge > 0.0) {
            return bad("importance.ridge must be positive".into());
        }
        match &self.dataset {
            DatasetSource::Blobs { n, d, class_sep } => {
                if *n < 4 || *d == 0 || !class_sep.is_finite() {
                    return bad("blobs need n >= 4, d >= 1 and a finite class_sep".into());
                }
            }
            DatasetSource::BarImages { n, size } => {
                if *n < 4 || *size < 3 {
                    return bad("bar_images need n >= 4 and size >= 3".into());
                }
            }
            DatasetSource::Csv(_) => {}
        }
        if matches!(self.shift.kind, crate::shiftlab::ShiftKind::BetaRotation { .. })
            && !matches!(self.dataset, DatasetSource::BarImages { .. })
        {
            return bad("beta_rotation shift requires the bar_images dataset".into());
        }
        self.shift.kind.validate()?;
        self.train.validate()?;
        self.penalty.validate()
    }
}
