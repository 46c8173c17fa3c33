use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::plan::{FragmentMode, FragmentPlan};
use super::stats::{summarize, FragmentReport};
use super::trial::{class_warnings, PreparedTrial};
use crate::error::{Error, Result};
use crate::fisher::empirical_fisher_diag;
use crate::numcore::{train_weighted, LossAugmenter, Mlp, ParamVector, TrainConfig};
use crate::prior::{FicsrPenalty, GlobalPrior, PenaltyConfig};
use crate::scalar::Scalar;
use crate::seeds::{self, stream};

/// Init-stream index of fold `i` is `FOLD_INIT_OFFSET + i`; batch fragment `j` uses `j`.
const FOLD_INIT_OFFSET: u64 = 10_000;
/// Init-stream index shared by every model trained on the whole training pool.
const POOL_INIT_INDEX: u64 = u64::MAX;

/// Switches of a FICsR run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FicsrOptions {
    pub penalty: PenaltyConfig,
    /// Start each fragment after the first at the prior mean instead of a fresh init.
    pub warm_start: bool,
}

impl FicsrOptions {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        Self { penalty: config.penalty, warm_start: config.warm_start }
    }
}

/// Per-fragment accuracies of a FICsR run and the prior it left behind.
#[derive(Clone, Debug)]
pub struct FicsrRun<T> {
    pub accuracies: Vec<f64>,
    pub prior: GlobalPrior<T>,
    pub warnings: Vec<String>,
}

/// Paired st-CV and FICsR reports at one noise level of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevelReport {
    pub std: f64,
    pub stcv: FragmentReport,
    pub ficsr: FragmentReport,
}

fn fragment_config(config: &ExperimentConfig, trial_seed: u64, index: u64) -> TrainConfig {
    let mut cfg = config.train.clone();
    cfg.seed = seeds::derive(seeds::derive(trial_seed, stream::SHUFFLE, index), stream::SHUFFLE, config.train.seed);
    cfg
}

fn fresh_model<T: Scalar>(config: &ExperimentConfig, trial: &PreparedTrial<T>, index: u64) -> Result<Mlp<T>> {
    Mlp::init(
        &trial.shapes,
        config.model.activation,
        seeds::derive(trial.seed, stream::INIT, index),
    )
}

fn fit<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    index: u64,
    start: Mlp<T>,
    data: &crate::numcore::Dataset<T>,
    weights: Option<&[T]>,
    augmenter: Option<&dyn LossAugmenter<T>>,
) -> Result<Mlp<T>> {
    let cfg = fragment_config(config, trial.seed, index);
    Ok(train_weighted(start, data, weights, &cfg, augmenter)?.model)
}

/// BL1: accuracy on the validation split of a model trained on the whole pool.
pub fn integral_accuracy<T: Scalar>(config: &ExperimentConfig, trial: &PreparedTrial<T>) -> Result<f64> {
    weighted_pool_accuracy(config, trial, None)
}

/// Pool model trained with per-example loss weights; `None` is plain ERM.
pub(crate) fn weighted_pool_accuracy<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    weights: Option<&[T]>,
) -> Result<f64> {
    let start = fresh_model(config, trial, POOL_INIT_INDEX)?;
    let model = fit(config, trial, POOL_INIT_INDEX, start, &trial.train, weights, None)?;
    model.accuracy(&trial.validation)
}

fn check_plan(plan: &FragmentPlan, n: usize, mode: FragmentMode) -> Result<()> {
    plan.validate()?;
    if plan.n != n || plan.mode != mode {
        return Err(Error::Config(format!(
            "plan covers {} rows in {:?} mode, training pool has {n} rows",
            plan.n, plan.mode
        )));
    }
    Ok(())
}

/// BL2: one independently initialized model per batch, each scored on the validation split.
pub fn stcv_fragments<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    plan: &FragmentPlan,
) -> Result<Vec<f64>> {
    check_plan(plan, trial.train.len(), FragmentMode::Batch)?;
    plan.fragments
        .iter()
        .enumerate()
        .map(|(j, frag)| {
            let data = trial.train.subset(frag);
            let start = fresh_model(config, trial, j as u64)?;
            fit(config, trial, j as u64, start, &data, None, None)?.accuracy(&trial.validation)
        })
        .collect()
}

fn ficsr_step<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    opts: &FicsrOptions,
    prior: &mut GlobalPrior<T>,
    index: u64,
    data: &crate::numcore::Dataset<T>,
) -> Result<Mlp<T>> {
    let start = if opts.warm_start && prior.fragments_seen() > 0 {
        let params = ParamVector::from_values(&trial.shapes, prior.theta_bar().to_vec())?;
        Mlp::from_params(params, config.model.activation)?
    } else {
        fresh_model(config, trial, index)?
    };
    let penalty = FicsrPenalty { prior, config: &opts.penalty };
    let model = fit(config, trial, index, start, data, None, Some(&penalty))?;
    let fisher = empirical_fisher_diag(&model, data)?;
    prior.accumulate(model.params().values(), &fisher)?;
    Ok(model)
}

/// E2: batches in plan order, each penalized towards and warm-started at the running prior.
pub fn ficsr_fragments<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    plan: &FragmentPlan,
    opts: &FicsrOptions,
) -> Result<FicsrRun<T>> {
    check_plan(plan, trial.train.len(), FragmentMode::Batch)?;
    opts.penalty.validate()?;
    let mut prior = GlobalPrior::new(trial.shapes.iter().map(|s| s.param_count()).sum())?;
    let mut accuracies = Vec::with_capacity(plan.len());
    let mut warnings = Vec::new();
    for (j, frag) in plan.fragments.iter().enumerate() {
        let data = trial.train.subset(frag);
        warnings.extend(class_warnings(&format!("batch {j}"), &data.class_counts()));
        let model = ficsr_step(config, trial, opts, &mut prior, j as u64, &data)?;
        accuracies.push(model.accuracy(&trial.validation)?);
    }
    Ok(FicsrRun { accuracies, prior, warnings })
}

/// BL3 / E3 / E4: fold `i` is scored by a model trained on the other folds.
///
/// `Method::Ficsr` visits folds in plan order and accumulates the prior over the
/// training sets of the folds already visited; any other method trains each fold
/// independently from a fresh init.
pub fn kfold_accuracies<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    plan: &FragmentPlan,
    method: Method,
    opts: &FicsrOptions,
) -> Result<Vec<f64>> {
    check_plan(plan, trial.train.len(), FragmentMode::Fold)?;
    let mut prior = GlobalPrior::new(trial.shapes.iter().map(|s| s.param_count()).sum())?;
    let mut accuracies = Vec::with_capacity(plan.len());
    for (i, fold) in plan.fragments.iter().enumerate() {
        let index = FOLD_INIT_OFFSET + i as u64;
        let data = trial.train.subset(&plan.complement(i));
        let held_out = trial.train.subset(fold);
        let model = match method {
            Method::Ficsr => ficsr_step(config, trial, opts, &mut prior, index, &data)?,
            Method::StCv => {
                let start = fresh_model(config, trial, index)?;
                fit(config, trial, index, start, &data, None, None)?
            }
            other => {
                return Err(Error::Config(format!(
                    "k-fold runs support st_cv and ficsr, not {}",
                    other.name()
                )))
            }
        };
        accuracies.push(model.accuracy(&held_out)?);
    }
    Ok(accuracies)
}

/// BL1 report: the single pool accuracy, which is its own baseline.
pub fn run_integral_cv<T: Scalar>(config: &ExperimentConfig, trial: &PreparedTrial<T>) -> Result<FragmentReport> {
    let acc = integral_accuracy(config, trial)?;
    summarize(&[acc], acc)
}

/// BL2 report, Δ against `baseline` (normally the BL1 accuracy).
pub fn run_fragmented_stcv<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    plan: &FragmentPlan,
    baseline: f64,
) -> Result<FragmentReport> {
    summarize(&stcv_fragments(config, trial, plan)?, baseline)
}

/// FICsR report, Δ against `baseline` (normally the st-CV μ on the same plan).
pub fn run_ficsr_sequential<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    plan: &FragmentPlan,
    opts: &FicsrOptions,
    baseline: f64,
) -> Result<FragmentReport> {
    summarize(&ficsr_fragments(config, trial, plan, opts)?.accuracies, baseline)
}

pub fn run_kfold<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    plan: &FragmentPlan,
    method: Method,
    opts: &FicsrOptions,
    baseline: f64,
) -> Result<FragmentReport> {
    summarize(&kfold_accuracies(config, trial, plan, method, opts)?, baseline)
}

/// FICsR at every λ of `grid` on one plan, Δ against `baseline`.
pub fn lambda_sweep<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    plan: &FragmentPlan,
    grid: &[f64],
    baseline: f64,
) -> Result<Vec<(f64, FragmentReport)>> {
    if grid.is_empty() {
        return Err(Error::Config("lambda grid must not be empty".into()));
    }
    grid.iter()
        .map(|&lambda| {
            let mut opts = FicsrOptions::from_config(config);
            opts.penalty.lambda = lambda;
            Ok((lambda, run_ficsr_sequential(config, trial, plan, &opts, baseline)?))
        })
        .collect()
}

/// st-CV and FICsR on the same plan at each noise level; both Δ columns use the
/// BL1 accuracy at that level, so `ficsr.mean_mu − stcv.mean_mu` is the paired gap.
pub fn noise_ablation<T: Scalar>(
    config: &ExperimentConfig,
    trial: &PreparedTrial<T>,
    plan: &FragmentPlan,
    stds: &[f64],
) -> Result<Vec<NoiseLevelReport>> {
    let opts = FicsrOptions::from_config(config);
    stds.iter()
        .map(|&std| {
            if !(std >= 0.0) {
                return Err(Error::Config(format!("noise std must be >= 0, got {std}")));
            }
            let noisy = trial.with_noise(std, config.shift.seed)?;
            let baseline = integral_accuracy(config, &noisy)?;
            Ok(NoiseLevelReport {
                std,
                stcv: run_fragmented_stcv(config, &noisy, plan, baseline)?,
                ficsr: run_ficsr_sequential(config, &noisy, plan, &opts, baseline)?,
            })
        })
        .collect()
}

