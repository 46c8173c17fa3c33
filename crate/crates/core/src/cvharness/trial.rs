use rand::seq::SliceRandom;

use super::config::{DatasetSource, ExperimentConfig};
use crate::cliio::load_csv_dataset;
use crate::error::{Error, Result};
use crate::numcore::{Dataset, LayerShape, Standardizer};
use crate::scalar::Scalar;
use crate::seeds::{self, stream};
use crate::shiftlab::{
    beta_rotation_shift, biased_subsample, gaussian_noise_inject, gen_bar_images,
    gen_gaussian_blobs, GrayImage, ShiftKind,
};

/// Training pool and fixed validation split of one trial, shifted and preprocessed.
#[derive(Clone, Debug)]
pub struct PreparedTrial<T> {
    pub trial: usize,
    pub seed: u64,
    pub train: Dataset<T>,
    pub validation: Dataset<T>,
    pub shapes: Vec<LayerShape>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> PreparedTrial<T> {
    /// Copy with `N(0, std²)` noise added to the training features; `std = 0` is a no-op.
    ///
    /// The noise draw depends only on the trial and shift seeds, so every level and every
    /// method sees the same standard-normal draws scaled by `std`.
    pub fn with_noise(&self, std: f64, shift_seed: u64) -> Result<Self> {
        let mut out = self.clone();
        if std > 0.0 {
            let seed = seeds::derive(self.seed, stream::NOISE, shift_seed);
            out.train = gaussian_noise_inject(&self.train, std, seed)?;
        }
        Ok(out)
    }
}

enum Source<T> {
    Table(Dataset<T>),
    Images(Vec<GrayImage<T>>, Vec<usize>, usize),
}

fn load_source<T: Scalar>(source: &DatasetSource, seed: u64) -> Result<Source<T>> {
    Ok(match source {
        DatasetSource::Blobs { n, d, class_sep } => {
            Source::Table(gen_gaussian_blobs(*n, 2, *d, *class_sep, 0.0, seed)?.0)
        }
        DatasetSource::Csv(schema) => Source::Table(load_csv_dataset(schema)?),
        DatasetSource::BarImages { n, size } => {
            let bars = gen_bar_images(*n, *size, seed)?;
            Source::Images(bars.images, bars.labels, bars.size)
        }
    })
}

fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_val = ((n as f64) * fraction).round() as usize;
    if n_val == 0 || n_val >= n {
        return Err(Error::Config(format!(
            "validation_fraction {fraction} leaves an empty split for n = {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeds::rng(seeds::derive(seed, stream::SPLIT, 0)));
    let mut val = idx[..n_val].to_vec();
    let mut train = idx[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    Ok((train, val))
}

fn pick<X: Clone>(items: &[X], idx: &[usize]) -> Vec<X> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

pub(crate) fn class_warnings(context: &str, counts: &[usize]) -> Vec<String> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(class, _)| format!("{context}: class {class} is absent"))
        .collect()
}

/// Builds trial `trial` of `config`.
///
/// Order: load or generate the source, hold out the validation split, shift the training
/// pool, standardize with training statistics, then add any Gaussian noise to the training
/// features.
pub fn prepare_trial<T: Scalar>(config: &ExperimentConfig, trial: usize) -> Result<PreparedTrial<T>> {
    let seed = config.trial_seed(trial);
    let shift = config.shift;
    let shift_seed = seeds::derive(seed, stream::SHIFT, shift.seed);
    let source = load_source::<T>(&config.dataset, seed)?;
    let n = match &source {
        Source::Table(d) => d.len(),
        Source::Images(im, _, _) => im.len(),
    };
    let (train_idx, val_idx) = split_indices(n, config.validation_fraction, seed)?;
    let mut warnings = Vec::new();

    let (mut train, mut validation) = match source {
        Source::Table(data) => (data.subset(&train_idx), data.subset(&val_idx)),
        Source::Images(images, labels, size) => {
            let mut tr_im = pick(&images, &train_idx);
            let mut va_im = pick(&images, &val_idx);
            if let ShiftKind::BetaRotation { a, b } = shift.kind {
                tr_im = beta_rotation_shift(&tr_im, a, b, shift_seed)?.images;
                let val_seed = seeds::derive(seed, stream::VALIDATION_SHIFT, shift.seed);
                va_im = beta_rotation_shift(&va_im, b, a, val_seed)?.images;
            }
            let to = |im: &[GrayImage<T>], idx: &[usize]| {
                crate::shiftlab::images_to_dataset(im, pick(&labels, idx), size)
            };
            (to(&tr_im, &train_idx)?, to(&va_im, &val_idx)?)
        }
    };

    if let ShiftKind::BiasedSubsample { severity, keep_fraction } = shift.kind {
        let out = biased_subsample(&train, severity, keep_fraction, shift_seed)?;
        warnings.extend(out.warnings);
        train = out.dataset;
    }
    warnings.extend(class_warnings("training pool", &train.class_counts()));

    if config.standardize {
        let z = Standardizer::fit(train.features())?;
        train = z.apply_dataset(&train)?;
        validation = z.apply_dataset(&validation)?;
    }

    let mut dims = vec![train.dim()];
    dims.extend(&config.model.hidden);
    dims.push(train.n_classes());
    let shapes = dims
        .windows(2)
        .map(|w| LayerShape { input: w[0], output: w[1] })
        .collect();

    let prepared = PreparedTrial { trial, seed, train, validation, shapes, warnings };
    match shift.kind {
        ShiftKind::GaussianNoise { std } => prepared.with_noise(std, shift.seed),
        _ => Ok(prepared),
    }
}
