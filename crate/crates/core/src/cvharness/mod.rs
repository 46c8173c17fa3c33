//! Fragmentation plans, experiment orchestrators and their statistics.
//!
//! Accuracies are fractions throughout; reports format them as percentages.

mod config;
mod plan;
mod protocol;
mod runs;
mod stats;
mod trial;
pub mod wilcoxon;

pub use config::{
    DatasetSource, ExperimentConfig, ImportanceSettings, Method, ModelSettings, Protocol,
    DEFAULT_FOLDS, DEFAULT_NOISE_STDS, DEFAULT_RATIOS,
};
pub use plan::{make_batch_plan, make_fold_plan, FragmentMode, FragmentPlan};
pub use protocol::{run_protocol, Aggregate, ClippedWeights, ProtocolOutput, ReportEntry, WilcoxonSummary};
pub use runs::{
    ficsr_fragments, integral_accuracy, kfold_accuracies, lambda_sweep,
    noise_ablation, run_ficsr_sequential, run_fragmented_stcv, run_integral_cv, run_kfold,
    stcv_fragments, FicsrOptions, FicsrRun, NoiseLevelReport,
};
pub use stats::{delta_percent, mean, summarize, variances, FragmentReport};
pub use trial::{prepare_trial, PreparedTrial};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
