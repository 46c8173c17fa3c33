//! Fisher-information-penalized sequential training over fragmented datasets.
//!
//! A training set split into fragments (batches or folds) is processed in order.
//! After each fragment the fitted parameters and their empirical diagonal Fisher
//! information are folded into a running-mean [`GlobalPrior`]. Every later fragment
//! warm-starts at the prior mean and trains on cross-entropy plus the anchored
//! quadratic penalty `λ Σ_j F̄_j (θ_j − θ̄_j)²`.
//!
//! Alongside the method the crate carries:
//!
//! - [`numcore`]: dense matrices, a small MLP with softmax cross-entropy, backprop and Adam.
//! - [`fisher`]: per-example scores, diagonal empirical Fisher, quadratic KL, CRLB.
//! - [`prior`]: the accumulated prior and the penalty.
//! - [`shiftlab`]: covariate-shift injectors and synthetic generators.
//! - [`importance`]: uLSIF / RuLSIF density-ratio estimation and weighted ERM.
//! - [`cvharness`]: fragmentation plans, experiment protocols, summaries, Wilcoxon test.
//! - [`cliio`]: CSV ingestion, JSON configs and reports, the `ficsr` CLI driver.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the element type to `f64`, which is what the experiment harness uses.

pub mod cliio;
pub mod cvharness;
pub mod error;
pub mod fisher;
pub mod importance;
pub mod numcore;
pub mod prior;
pub mod scalar;
pub mod seeds;
pub mod shiftlab;

pub use error::{Error, Result};
pub use fisher::FisherDiagonal;
pub use importance::{ImportanceWeights, KernelRatioModel};
pub use numcore::{
    Activation, AdamState, Dataset, LayerShape, Matrix, Mlp, ParamVector, TrainConfig,
};
pub use prior::{GlobalPrior, PenaltyConfig, PenaltyForm};
pub use scalar::Scalar;

pub type Matrix64 = Matrix<f64>;
pub type Dataset64 = Dataset<f64>;
pub type Mlp64 = Mlp<f64>;
pub type ParamVector64 = ParamVector<f64>;
pub type FisherDiagonal64 = FisherDiagonal<f64>;
pub type GlobalPrior64 = GlobalPrior<f64>;
pub type KernelRatioModel64 = KernelRatioModel<f64>;

pub type Matrix32 = Matrix<f32>;
pub type Dataset32 = Dataset<f32>;
pub type Mlp32 = Mlp<f32>;

/// Crate version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
