use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{adam_step, AdamConfig, AdamState, Dataset, Mlp};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;
use crate::seeds;

/// Extra term added to the training objective.
pub trait LossAugmenter<T: Scalar> {
    fn penalty(&self, theta: &[T]) -> T;

    /// Adds the penalty gradient at `theta` to `grad`.
    fn add_gradient(&self, theta: &[T], grad: &mut [T]);

    /// An inert augmenter is skipped entirely.
    fn is_inert(&self) -> bool {
        false
    }
}

/// Minibatch size: a count or the keyword `"full"`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BatchSize {
    Size(usize),
    #[default]
    Full,
}

impl Serialize for BatchSize {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BatchSize::Size(n) => s.serialize_u64(*n as u64),
            BatchSize::Full => s.serialize_str("full"),
        }
    }
}

impl<'de> Deserialize<'de> for BatchSize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Size(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Size(n) => Ok(BatchSize::Size(n)),
            Raw::Word(w) if w == "full" => Ok(BatchSize::Full),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a positive count or \"full\", got \"{w}\""
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub minibatch_size: BatchSize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 1500,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            minibatch_size: BatchSize::Full,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !open_unit(self.adam_beta1) || !open_unit(self.adam_beta2) {
            return Err(Error::Config("adam betas must lie in (0, 1)".into()));
        }
        if self.adam_eps <= 0.0 {
            return Err(Error::Config("adam_eps must be positive".into()));
        }
        if self.minibatch_size == BatchSize::Size(0) {
            return Err(Error::Config("minibatch_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub model: Mlp<T>,
    /// Objective value (loss plus penalty) per epoch, evaluated before that epoch's updates.
    pub loss_trace: Vec<f64>,
}

pub fn train<T: Scalar>(
    model: Mlp<T>,
    data: &Dataset<T>,
    config: &TrainConfig,
    augmenter: Option<&dyn LossAugmenter<T>>,
) -> Result<TrainOutcome<T>> {
    train_weighted(model, data, None, config, augmenter)
}

/// Adam on `(1/n) Σ w_i ℓ_i + penalty`; `weights = None` means all ones.
pub fn train_weighted<T: Scalar>(
    mut model: Mlp<T>,
    data: &Dataset<T>,
    weights: Option<&[T]>,
    config: &TrainConfig,
    augmenter: Option<&dyn LossAugmenter<T>>,
) -> Result<TrainOutcome<T>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("training"));
    }
    config.validate()?;
    if let Some(w) = weights {
        check_len("example weights", data.len(), w.len())?;
    }
    let augmenter = augmenter.filter(|a| !a.is_inert());
    let adam = config.adam();
    let mut state = AdamState::new(model.params().len());
    let mut trace = Vec::with_capacity(config.epochs);

    let batch = match config.minibatch_size {
        BatchSize::Full => data.len(),
        BatchSize::Size(b) => b.min(data.len()),
    };

    if batch == data.len() {
        for _ in 0..config.epochs {
            let (loss, grad) = model.loss_and_grad(data, weights)?;
            let objective = step(&mut model, loss, grad, &mut state, &adam, augmenter)?;
            trace.push(objective.to_f64_lossy());
        }
    } else {
        let mut rng = seeds::rng(seeds::derive(config.seed, seeds::stream::SHUFFLE, 0));
        let mut order: Vec<usize> = (0..data.len()).collect();
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            let mut epoch_sum = 0.0;
            let mut chunks = 0usize;
            for chunk in order.chunks(batch) {
                let sub = data.subset(chunk);
                let sub_w: Option<Vec<T>> = weights.map(|w| chunk.iter().map(|&i| w[i]).collect());
                let (loss, grad) = model.loss_and_grad(&sub, sub_w.as_deref())?;
                epoch_sum += step(&mut model, loss, grad, &mut state, &adam, augmenter)?.to_f64_lossy();
                chunks += 1;
            }
            trace.push(epoch_sum / chunks as f64);
        }
    }
    Ok(TrainOutcome {
        model,
        loss_trace: trace,
    })
}

fn step<T: Scalar>(
    model: &mut Mlp<T>,
    loss: T,
    mut grad: Vec<T>,
    state: &mut AdamState<T>,
    adam: &AdamConfig,
    augmenter: Option<&dyn LossAugmenter<T>>,
) -> Result<T> {
    let mut objective = loss;
    if let Some(a) = augmenter {
        let theta = model.params().values();
        objective += a.penalty(theta);
        a.add_gradient(theta, &mut grad);
    }
    if !objective.is_finite() {
        return Err(Error::NonFinite("training objective"));
    }
    adam_step(model.params_mut().values_mut(), &grad, state, adam)?;
    Ok(objective)
}
