//! The global parameter prior accumulated across fragments and the penalty it induces.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::fisher::FisherDiagonal;
use crate::numcore::{cross_entropy, Dataset, LossAugmenter, Mlp};
use crate::scalar::Scalar;

/// Default penalty weight.
pub const DEFAULT_LAMBDA: f64 = 0.1;

/// λ grid used for calibration sweeps.
pub const LAMBDA_GRID: [f64; 4] = [0.01, 0.04, 0.07, 0.1];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyForm {
    /// `λ Σ_j F̄_j (θ_j − θ̄_j)²`.
    #[default]
    Anchored,
    /// `λ Σ_j F̄_j`: constant in θ, contributes no gradient. Kept for comparison runs.
    TraceOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    pub lambda: f64,
    pub form: PenaltyForm,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            form: PenaltyForm::Anchored,
        }
    }
}

impl PenaltyConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "penalty lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Running means of fitted fragment parameters and of their Fisher diagonals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalPrior<T> {
    theta_bar: Vec<T>,
    fisher_bar: Vec<T>,
    fragments_seen: usize,
}

impl<T: Scalar> GlobalPrior<T> {
    pub fn new(param_len: usize) -> Result<Self> {
        if param_len == 0 {
            return Err(Error::Config("prior needs at least one parameter".into()));
        }
        Ok(Self {
            theta_bar: vec![T::zero(); param_len],
            fisher_bar: vec![T::zero(); param_len],
            fragments_seen: 0,
        })
    }

    #[inline]
    pub fn theta_bar(&self) -> &[T] {
        &self.theta_bar
    }

    #[inline]
    pub fn fisher_bar(&self) -> &[T] {
        &self.fisher_bar
    }

    #[inline]
    pub fn fragments_seen(&self) -> usize {
        self.fragments_seen
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.theta_bar.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.theta_bar.is_empty()
    }

    /// No fragment has been folded in yet; the penalty is identically zero.
    #[inline]
    pub fn is_inert(&self) -> bool {
        self.fragments_seen == 0
    }

    /// Folds one fragment fit into the running means.
    pub fn accumulate(&mut self, theta_fit: &[T], fisher_fit: &FisherDiagonal<T>) -> Result<()> {
        check_len("prior parameters", self.len(), theta_fit.len())?;
        check_len("prior Fisher", self.len(), fisher_fit.len())?;
        self.fragments_seen += 1;
        let k = T::from_usize(self.fragments_seen).unwrap();
        for (m, &x) in self.theta_bar.iter_mut().zip(theta_fit) {
            *m += (x - *m) / k;
        }
        for (m, &x) in self.fisher_bar.iter_mut().zip(fisher_fit.values()) {
            *m += (x - *m) / k;
        }
        Ok(())
    }

    fn check_theta(&self, theta: &[T]) -> Result<()> {
        check_len("penalty parameters", self.len(), theta.len())
    }

    fn penalty_unchecked(&self, theta: &[T], config: &PenaltyConfig) -> T {
        if self.is_inert() || config.lambda == 0.0 {
            return T::zero();
        }
        let lambda = T::lit(config.lambda);
        match config.form {
            PenaltyForm::Anchored => {
                let s: T = self
                    .fisher_bar
                    .iter()
                    .zip(self.theta_bar.iter().zip(theta))
                    .map(|(&f, (&m, &t))| f * (t - m) * (t - m))
                    .sum();
                lambda * s
            }
            PenaltyForm::TraceOnly => lambda * self.fisher_bar.iter().copied().sum::<T>(),
        }
    }

    fn add_penalty_grad_unchecked(&self, theta: &[T], config: &PenaltyConfig, grad: &mut [T]) {
        if self.is_inert() || config.lambda == 0.0 || config.form == PenaltyForm::TraceOnly {
            return;
        }
        let two_lambda = T::lit(2.0 * config.lambda);
        for ((g, &f), (&m, &t)) in grad
            .iter_mut()
            .zip(&self.fisher_bar)
            .zip(self.theta_bar.iter().zip(theta))
        {
            *g += two_lambda * f * (t - m);
        }
    }
}

pub fn prior_init<T: Scalar>(param_len: usize) -> Result<GlobalPrior<T>> {
    GlobalPrior::new(param_len)
}

pub fn prior_accumulate<T: Scalar>(
    mut prior: GlobalPrior<T>,
    theta_fit: &[T],
    fisher_fit: &FisherDiagonal<T>,
) -> Result<GlobalPrior<T>> {
    prior.accumulate(theta_fit, fisher_fit)?;
    Ok(prior)
}

pub fn ficsr_penalty<T: Scalar>(prior: &GlobalPrior<T>, theta: &[T], config: &PenaltyConfig) -> Result<T> {
    prior.check_theta(theta)?;
    Ok(prior.penalty_unchecked(theta, config))
}

/// `2λ F̄_j (θ_j − θ̄_j)` per coordinate.
pub fn ficsr_penalty_grad<T: Scalar>(
    prior: &GlobalPrior<T>,
    theta: &[T],
    config: &PenaltyConfig,
) -> Result<Vec<T>> {
    prior.check_theta(theta)?;
    let mut grad = vec![T::zero(); theta.len()];
    prior.add_penalty_grad_unchecked(theta, config, &mut grad);
    Ok(grad)
}

/// Cross-entropy on `batch` plus the penalty at the model's current parameters.
pub fn penalized_loss<T: Scalar>(
    model: &Mlp<T>,
    batch: &Dataset<T>,
    prior: &GlobalPrior<T>,
    config: &PenaltyConfig,
) -> Result<T> {
    let probs = model.forward(batch.features())?;
    let ce = cross_entropy(&probs, batch.labels())?;
    Ok(ce + ficsr_penalty(prior, model.params().values(), config)?)
}

/// The penalty as a training-loss augmenter.
pub struct FicsrPenalty<'a, T> {
    pub prior: &'a GlobalPrior<T>,
    pub config: &'a PenaltyConfig,
}

impl<T: Scalar> LossAugmenter<T> for FicsrPenalty<'_, T> {
    fn penalty(&self, theta: &[T]) -> T {
        self.prior.penalty_unchecked(theta, self.config)
    }

    fn add_gradient(&self, theta: &[T], grad: &mut [T]) {
        self.prior.add_penalty_grad_unchecked(theta, self.config, grad);
    }

    fn is_inert(&self) -> bool {
        self.prior.is_inert() || self.config.lambda == 0.0
    }
}
