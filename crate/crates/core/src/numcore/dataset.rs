use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Feature matrix with integer class labels in `0..n_classes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    features: Matrix<T>,
    labels: Vec<usize>,
    n_classes: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(features: Matrix<T>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        check_len("dataset labels", features.rows(), labels.len())?;
        if n_classes < 2 {
            return Err(Error::Config(format!(
                "a dataset needs at least 2 classes, got {n_classes}"
            )));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
            return Err(Error::Label { label, n_classes });
        }
        Ok(Self {
            features,
            labels,
            n_classes,
        })
    }

    #[inline]
    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    pub fn features_mut(&mut self) -> &mut Matrix<T> {
        &mut self.features
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
        }
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let features = self.features.vstack(&other.features)?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self::new(features, labels, self.n_classes.max(other.n_classes))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn with_features(&self, features: Matrix<T>) -> Result<Self> {
        Self::new(features, self.labels.clone(), self.n_classes)
    }
}

/// Per-column affine standardization fitted on one split and reused on others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<T> {
    pub means: Vec<T>,
    pub scales: Vec<T>,
}

impl<T: Scalar> Standardizer<T> {
    /// Column means and population standard deviations; constant columns get scale 1.
    pub fn fit(features: &Matrix<T>) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::EmptyDataset("standardizer fit"));
        }
        let means = features.column_means();
        let mut vars = vec![T::zero(); features.cols()];
        for row in features.iter_rows() {
            for ((v, &x), &m) in vars.iter_mut().zip(row).zip(&means) {
                *v += (x - m) * (x - m);
            }
        }
        let n = T::from_usize(features.rows()).unwrap();
        let scales = vars
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > T::epsilon() {
                    s
                } else {
                    T::one()
                }
            })
            .collect();
        Ok(Self { means, scales })
    }

    pub fn apply(&self, features: &Matrix<T>) -> Result<Matrix<T>> {
        check_len("standardizer columns", self.means.len(), features.cols())?;
        let mut out = features.clone();
        for r in 0..out.rows() {
            for ((x, &m), &s) in out.row_mut(r).iter_mut().zip(&self.means).zip(&self.scales) {
                *x = (*x - m) / s;
            }
        }
        Ok(out)
    }

    pub fn apply_dataset(&self, data: &Dataset<T>) -> Result<Dataset<T>> {
        data.with_features(self.apply(data.features())?)
    }
}
