//! Dense matrices, a fixed-topology MLP with softmax cross-entropy, reverse-mode
//! gradients and the Adam optimizer.

mod adam;
mod dataset;
pub mod linalg;
mod matrix;
mod mlp;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dataset::{Dataset, Standardizer};
pub use matrix::Matrix;
pub use mlp::{cross_entropy, grad_loss, per_example_losses, Activation, LayerShape, Mlp, ParamVector, PROB_FLOOR};
pub use train::{train, train_weighted, BatchSize, LossAugmenter, TrainConfig, TrainOutcome};
