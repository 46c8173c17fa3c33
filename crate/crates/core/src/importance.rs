//! Density-ratio estimation with a Gaussian kernel basis (uLSIF and its relative
//! variant RuLSIF) and importance-weighted empirical risk.
//!
//! The relative ratio targets `w(x) = p_te(x) / (β p_te(x) + (1 − β) p_tr(x))` with
//! `β = mixture`; `β = 0` is the plain ratio `p_te / p_tr`, and every `β > 0` bounds
//! the target by `1/β`.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::numcore::{linalg, per_example_losses, Dataset, Matrix, Mlp};
use crate::scalar::Scalar;
use crate::seeds;

/// Default number of kernel centers (capped by the test sample size).
pub const DEFAULT_CENTERS: usize = 100;
pub const DEFAULT_RIDGE: f64 = 1e-3;
/// Points used by the median heuristic per sample.
const MEDIAN_SUBSAMPLE: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRatioModel<T> {
    pub centers: Matrix<T>,
    pub alpha: Vec<T>,
    pub kernel_width: T,
    pub mixture: T,
    pub ridge: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceWeights<T> {
    pub values: Vec<T>,
    /// Entries whose raw kernel expansion was negative and got clipped to 0.
    pub clipped_count: usize,
}

impl<T: Scalar> ImportanceWeights<T> {
    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![T::one(); n],
            clipped_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `w^exponent` elementwise, with `0⁰ = 1`.
    pub fn flattened(&self, exponent: f64) -> Vec<T> {
        if exponent == 0.0 {
            return vec![T::one(); self.values.len()];
        }
        let e = T::lit(exponent);
        self.values.iter().map(|&w| w.powf(e)).collect()
    }

    pub fn mean(&self) -> T {
        if self.values.is_empty() {
            return T::zero();
        }
        self.values.iter().copied().sum::<T>() / T::from_usize(self.values.len()).unwrap()
    }
}

#[inline]
fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// `exp(−‖x − c‖² / (2σ²))`.
#[inline]
pub fn gaussian_kernel<T: Scalar>(x: &[T], c: &[T], width: T) -> T {
    (-sq_dist(x, c) / (T::lit(2.0) * width * width)).exp()
}

fn strided_rows<T: Scalar>(x: &Matrix<T>, cap: usize) -> Vec<&[T]> {
    let step = x.rows().div_ceil(cap).max(1);
    (0..x.rows()).step_by(step).map(|r| x.row(r)).collect()
}

/// Median pairwise Euclidean distance over the pooled sample.
///
/// Each sample contributes at most 500 evenly strided rows.
pub fn median_heuristic<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    check_len("pooled sample columns", a.cols(), b.cols())?;
    let mut pool = strided_rows(a, MEDIAN_SUBSAMPLE);
    pool.extend(strided_rows(b, MEDIAN_SUBSAMPLE));
    if pool.len() < 2 {
        return Err(Error::EmptyDataset("median heuristic needs two points"));
    }
    let mut dists = Vec::with_capacity(pool.len() * (pool.len() - 1) / 2);
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            dists.push(sq_dist(pool[i], pool[j]).sqrt().to_f64_lossy());
        }
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 0 {
        0.5 * (dists[mid - 1] + dists[mid])
    } else {
        dists[mid]
    };
    if median <= 0.0 {
        return Err(Error::Numerical(
            "median pairwise distance is zero; pass an explicit kernel width".into(),
        ));
    }
    Ok(T::lit(median))
}

/// Kernel design matrix, one row per sample row, one column per center.
fn design<T: Scalar>(x: &Matrix<T>, centers: &Matrix<T>, width: T) -> Matrix<T> {
    let mut k = Matrix::zeros(x.rows(), centers.rows());
    for r in 0..x.rows() {
        let row = x.row(r);
        for c in 0..centers.rows() {
            k.set(r, c, gaussian_kernel(row, centers.row(c), width));
        }
    }
    k
}

/// `(1/n) Kᵀ K`, assembled on the upper triangle and mirrored.
fn second_moment<T: Scalar>(k: &Matrix<T>) -> Matrix<T> {
    let m = k.cols();
    let mut h = Matrix::zeros(m, m);
    for row in k.iter_rows() {
        for i in 0..m {
            let ki = row[i];
            for j in i..m {
                let v = h.get(i, j) + ki * row[j];
                h.set(i, j, v);
            }
        }
    }
    let n = T::from_usize(k.rows()).unwrap();
    for i in 0..m {
        for j in i..m {
            let v = h.get(i, j) / n;
            h.set(i, j, v);
            h.set(j, i, v);
        }
    }
    h
}

/// Plain least-squares importance fit: `rulsif_fit` with `mixture = 0`.
pub fn ulsif_fit<T: Scalar>(
    train_x: &Matrix<T>,
    test_x: &Matrix<T>,
    kernel_width: Option<T>,
    ridge: T,
    m_centers: Option<usize>,
    seed: u64,
) -> Result<KernelRatioModel<T>> {
    rulsif_fit(train_x, test_x, T::zero(), kernel_width, ridge, m_centers, seed)
}

/// Relative least-squares importance fit.
///
/// Centers are `m_centers` test rows drawn without replacement (default `min(100, n_test)`).
/// Solves `(H + ridge·I) α = h` with `H = β H_te + (1 − β) H_tr`, `H_s = mean_s φ φᵀ`
/// and `h = mean_te φ`. `kernel_width = None` uses the median heuristic.
pub fn rulsif_fit<T: Scalar>(
    train_x: &Matrix<T>,
    test_x: &Matrix<T>,
    mixture: T,
    kernel_width: Option<T>,
    ridge: T,
    m_centers: Option<usize>,
    seed: u64,
) -> Result<KernelRatioModel<T>> {
    if train_x.rows() == 0 || test_x.rows() == 0 {
        return Err(Error::EmptyDataset("density-ratio fit needs train and test rows"));
    }
    check_len("test sample columns", train_x.cols(), test_x.cols())?;
    if !(mixture >= T::zero() && mixture < T::one()) {
        return Err(Error::Config(format!("mixture must lie in [0, 1), got {mixture}")));
    }
    if !(ridge > T::zero()) {
        return Err(Error::Config(format!("ridge must be positive, got {ridge}")));
    }
    let m = m_centers.unwrap_or(DEFAULT_CENTERS.min(test_x.rows()));
    if m == 0 || m > test_x.rows() {
        return Err(Error::Config(format!(
            "m_centers must lie in 1..={}, got {m}",
            test_x.rows()
        )));
    }
    let width = match kernel_width {
        Some(w) if w > T::zero() => w,
        Some(w) => return Err(Error::Config(format!("kernel width must be positive, got {w}"))),
        None => median_heuristic(train_x, test_x)?,
    };

    let mut rng = seeds::rng(seed);
    let picks: Vec<usize> = index::sample(&mut rng, test_x.rows(), m).into_vec();
    let centers = test_x.select_rows(&picks);

    let k_tr = design(train_x, &centers, width);
    let k_te = design(test_x, &centers, width);
    let mut h_mat = second_moment(&k_tr);
    if mixture > T::zero() {
        let h_te = second_moment(&k_te);
        let keep = T::one() - mixture;
        for (a, &b) in h_mat.as_mut_slice().iter_mut().zip(h_te.as_slice()) {
            *a = mixture * b + keep * *a;
        }
    }
    let h_vec = k_te.column_means();
    for i in 0..m {
        let v = h_mat.get(i, i) + ridge;
        h_mat.set(i, i, v);
    }
    let alpha = linalg::cholesky_solve(&h_mat, &h_vec, T::lit(1e-10)).map_err(|e| match e {
        Error::Numerical(msg) => Error::Numerical(format!(
            "density-ratio system could not be solved with ridge {ridge}: {msg}"
        )),
        other => other,
    })?;

    Ok(KernelRatioModel {
        centers,
        alpha,
        kernel_width: width,
        mixture,
        ridge,
    })
}

/// Evaluates `Σ_l α_l K(x, c_l)` per row and clips negatives to 0.
pub fn weights_at<T: Scalar>(model: &KernelRatioModel<T>, x: &Matrix<T>) -> Result<ImportanceWeights<T>> {
    check_len("importance query columns", model.centers.cols(), x.cols())?;
    check_len("kernel coefficients", model.centers.rows(), model.alpha.len())?;
    let mut clipped = 0;
    let values = x
        .iter_rows()
        .map(|row| {
            let raw: T = model
                .centers
                .iter_rows()
                .zip(&model.alpha)
                .map(|(c, &a)| a * gaussian_kernel(row, c, model.kernel_width))
                .sum();
            if raw < T::zero() {
                clipped += 1;
                T::zero()
            } else {
                raw
            }
        })
        .collect();
    Ok(ImportanceWeights {
        values,
        clipped_count: clipped,
    })
}

/// `(1/n) Σ_j ℓ_j · w_j^flatten_exponent`, with `ℓ_j` the per-example cross-entropy.
pub fn weighted_erm_loss<T: Scalar>(
    model: &Mlp<T>,
    data: &Dataset<T>,
    weights: &ImportanceWeights<T>,
    flatten_exponent: f64,
) -> Result<T> {
    if !(0.0..=1.0).contains(&flatten_exponent) {
        return Err(Error::Config(format!(
            "flatten_exponent must lie in [0, 1], got {flatten_exponent}"
        )));
    }
    check_len("importance weights", data.len(), weights.len())?;
    if data.is_empty() {
        return Err(Error::EmptyDataset("weighted ERM loss"));
    }
    let probs = model.forward(data.features())?;
    let losses = per_example_losses(&probs, data.labels())?;
    Ok(weighted_mean(&losses, &weights.flattened(flatten_exponent)))
}

pub(crate) fn weighted_mean<T: Scalar>(losses: &[T], w: &[T]) -> T {
    let total: T = losses.iter().zip(w).map(|(&l, &wi)| l * wi).sum();
    total / T::from_usize(losses.len()).unwrap()
}
