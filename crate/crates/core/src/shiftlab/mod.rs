//! Covariate-shift injectors and synthetic dataset generators.
//!
//! Every function here is a deterministic function of its inputs and seed.

mod noise;
mod rotation;
mod subsample;
mod synth;

pub use noise::gaussian_noise_inject;
pub use rotation::{beta_rotation_shift, rotate_single, GrayImage, RotationOutcome};
pub use subsample::{biased_subsample, first_principal_scores, SubsampleOutcome};
pub use synth::{gen_bar_images, gen_gaussian_blobs, BarImages};
pub(crate) use synth::images_to_dataset;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_KEEP_FRACTION: f64 = 0.5;

fn default_keep_fraction() -> f64 {
    DEFAULT_KEEP_FRACTION
}

/// A covariate shift to induce on the training side of an experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShiftKind {
    /// Training images rotated by `180°·Beta(a, b)`, validation images by `180°·Beta(b, a)`.
    BetaRotation { a: f64, b: f64 },
    /// Projection-dependent selection along the first principal direction.
    BiasedSubsample {
        severity: f64,
        #[serde(default = "default_keep_fraction")]
        keep_fraction: f64,
    },
    GaussianNoise { std: f64 },
    #[default]
    None,
}

impl ShiftKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShiftKind::BetaRotation { .. } => "beta_rotation",
            ShiftKind::BiasedSubsample { .. } => "biased_subsample",
            ShiftKind::GaussianNoise { .. } => "gaussian_noise",
            ShiftKind::None => "none",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match *self {
            ShiftKind::BetaRotation { a, b } if !(a > 0.0 && b > 0.0) => {
                bad("beta_rotation needs a > 0 and b > 0")
            }
            ShiftKind::BiasedSubsample { severity, .. } if !(severity >= 0.0) => {
                bad("biased_subsample severity must be >= 0")
            }
            ShiftKind::BiasedSubsample { keep_fraction, .. }
                if !(keep_fraction > 0.0 && keep_fraction <= 1.0) =>
            {
                bad("biased_subsample keep_fraction must lie in (0, 1]")
            }
            ShiftKind::GaussianNoise { std } if !(std >= 0.0 && std.is_finite()) => {
                bad("gaussian_noise std must be >= 0")
            }
            _ => Ok(()),
        }
    }
}

/// Shift kind with its parameters and seed, as written in experiment configs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    #[serde(flatten)]
    pub kind: ShiftKind,
    #[serde(default)]
    pub seed: u64,
}

impl ShiftSpec {
    pub fn none() -> Self {
        Self::default()
    }
}
