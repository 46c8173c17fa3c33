//! Per-example scores, the empirical diagonal Fisher information, the quadratic
//! KL approximation built on it, and Cramér–Rao variance bounds.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::numcore::{Dataset, Mlp, ParamVector};
use crate::scalar::Scalar;

/// Mean squared score per parameter. Entries are non-negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FisherDiagonal<T> {
    values: Vec<T>,
    sample_count: usize,
}

impl<T: Scalar> FisherDiagonal<T> {
    pub fn new(values: Vec<T>, sample_count: usize) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::Numerical(
                "Fisher diagonal entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            values,
            sample_count,
        })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![T::zero(); len],
            sample_count: 0,
        }
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn trace(&self) -> T {
        self.values.iter().copied().sum()
    }
}

/// Gradient of `log P(y | x; θ)` for one example.
pub fn per_example_score<T: Scalar>(model: &Mlp<T>, x: &[T], y: usize) -> Result<ParamVector<T>> {
    check_len("example features", model.input_dim(), x.len())?;
    if y >= model.n_classes() {
        return Err(Error::Label {
            label: y,
            n_classes: model.n_classes(),
        });
    }
    let mut score = vec![T::zero(); model.params().len()];
    let mut ws = model.workspace();
    model.accumulate_example(x, y, -T::one(), &mut score, &mut ws);
    ParamVector::from_values(model.params().shapes(), score)
}

/// `F_j = (1/n) Σ_i s_{ij}²` with `s_i` the score of example `i`.
pub fn empirical_fisher_diag<T: Scalar>(model: &Mlp<T>, data: &Dataset<T>) -> Result<FisherDiagonal<T>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("empirical Fisher"));
    }
    check_len("dataset features", model.input_dim(), data.dim())?;
    if let Some(&label) = data.labels().iter().find(|&&l| l >= model.n_classes()) {
        return Err(Error::Label {
            label,
            n_classes: model.n_classes(),
        });
    }
    let len = model.params().len();
    let mut acc = vec![T::zero(); len];
    let mut score = vec![T::zero(); len];
    let mut ws = model.workspace();
    for (row, &y) in data.features().iter_rows().zip(data.labels()) {
        score.iter_mut().for_each(|s| *s = T::zero());
        model.accumulate_example(row, y, -T::one(), &mut score, &mut ws);
        for (a, &s) in acc.iter_mut().zip(&score) {
            *a += s * s;
        }
    }
    let n = T::from_usize(data.len()).unwrap();
    acc.iter_mut().for_each(|a| *a /= n);
    FisherDiagonal::new(acc, data.len())
}

/// `½ Σ_j F_j (θ_j − θ_ref,j)²`.
pub fn kl_quadratic<T: Scalar>(fisher: &FisherDiagonal<T>, theta_ref: &[T], theta: &[T]) -> Result<T> {
    check_len("reference parameters", fisher.len(), theta_ref.len())?;
    check_len("parameters", fisher.len(), theta.len())?;
    let sum: T = fisher
        .values()
        .iter()
        .zip(theta_ref.iter().zip(theta))
        .map(|(&f, (&r, &t))| f * (t - r) * (t - r))
        .sum();
    Ok(T::lit(0.5) * sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum VarianceBound<T> {
    Bounded(T),
    /// The parameter carries no Fisher information.
    Unbounded,
}

/// Per-parameter lower bound `1 / (n F_j)` on the variance of an unbiased estimator.
pub fn crlb_bound<T: Scalar>(fisher: &FisherDiagonal<T>, n: usize) -> Result<Vec<VarianceBound<T>>> {
    if n == 0 {
        return Err(Error::Config("CRLB needs a sample size of at least 1".into()));
    }
    let n = T::from_usize(n).unwrap();
    Ok(fisher
        .values()
        .iter()
        .map(|&f| {
            if f > T::zero() {
                VarianceBound::Bounded(T::one() / (n * f))
            } else {
                VarianceBound::Unbounded
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{grad_loss, Activation, LayerShape, Matrix};

    fn model() -> Mlp<f64> {
        let shapes = [LayerShape::new(3, 4), LayerShape::new(4, 3)];
        Mlp::init(&shapes, Activation::Tanh, 21).unwrap()
    }

    #[test]
    fn score_is_negated_singleton_gradient() {
        let m = model();
        let x = vec![0.2, -0.7, 1.1];
        let score = per_example_score(&m, &x, 2).unwrap();
        let xm = Matrix::new(1, 3, x).unwrap();
        let grad = grad_loss(&m, &xm, &[2], None).unwrap();
        for (s, g) in score.values().iter().zip(grad.values()) {
            assert_eq!(*s, -*g);
        }
    }

    #[test]
    fn copies_of_one_example_give_squared_score() {
        let m = model();
        let x = vec![0.5, 0.1, -0.3];
        let score = per_example_score(&m, &x, 1).unwrap();
        let rows = vec![x; 7];
        let data = Dataset::new(Matrix::from_rows(&rows).unwrap(), vec![1; 7], 3).unwrap();
        let f = empirical_fisher_diag(&m, &data).unwrap();
        assert_eq!(f.sample_count(), 7);
        for (fj, sj) in f.values().iter().zip(score.values()) {
            assert!((fj - sj * sj).abs() <= 1e-15 * (1.0 + sj * sj));
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let data = Dataset::new(Matrix::<f64>::zeros(0, 3), vec![], 3).unwrap();
        assert!(matches!(
            empirical_fisher_diag(&model(), &data),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn kl_quadratic_examples() {
        let f = FisherDiagonal::new(vec![2.0, 0.0], 1).unwrap();
        assert_eq!(kl_quadratic(&f, &[0.0, 0.0], &[3.0, 5.0]).unwrap(), 9.0);
        assert_eq!(kl_quadratic(&f, &[1.0, 4.0], &[1.0, 4.0]).unwrap(), 0.0);
        let g = FisherDiagonal::new(vec![1.0f64], 1).unwrap();
        assert!((kl_quadratic(&g, &[0.0], &[0.4]).unwrap() - 0.08).abs() < 1e-15);
        assert!(kl_quadratic(&g, &[0.0, 1.0], &[0.4]).is_err());
    }

    #[test]
    fn crlb_examples() {
        let b = |f: f64, n| crlb_bound(&FisherDiagonal::new(vec![f], 1).unwrap(), n).unwrap()[0];
        assert_eq!(b(1.0, 1), VarianceBound::Bounded(1.0));
        assert_eq!(b(4.0, 25), VarianceBound::Bounded(0.01));
        assert_eq!(b(0.0, 10), VarianceBound::Unbounded);
        assert!(crlb_bound(&FisherDiagonal::new(vec![1.0], 1).unwrap(), 0).is_err());
    }

    #[test]
    fn negative_entries_are_rejected() {
        assert!(FisherDiagonal::new(vec![1.0, -1e-3], 1).is_err());
    }
}
