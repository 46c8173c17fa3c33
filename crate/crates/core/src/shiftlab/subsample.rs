use rand::Rng;

use crate::error::{Error, Result};
use crate::numcore::Dataset;
use crate::scalar::Scalar;
use crate::seeds;

#[derive(Clone, Debug)]
pub struct SubsampleOutcome<T> {
    pub dataset: Dataset<T>,
    /// Selected row indices into the input, ascending.
    pub indices: Vec<usize>,
    /// Per-row selection weights `sigmoid(severity · z_i)`.
    pub selection_weights: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Standardized projections onto the leading principal direction.
///
/// The direction is found by power iteration on the sample covariance and oriented so its
/// largest-magnitude component is positive. Degenerate (zero-variance) data yields zeros.
pub fn first_principal_scores<T: Scalar>(data: &Dataset<T>) -> Vec<f64> {
    let x = data.features();
    let (n, d) = (x.rows(), x.cols());
    if n == 0 || d == 0 {
        return vec![0.0; n];
    }
    let means: Vec<f64> = x.column_means().into_iter().map(Scalar::to_f64_lossy).collect();
    let centered: Vec<f64> = x
        .iter_rows()
        .flat_map(|row| row.iter().zip(&means).map(|(&v, &m)| v.to_f64_lossy() - m))
        .collect();
    let mut cov = vec![0.0; d * d];
    for row in centered.chunks_exact(d) {
        for i in 0..d {
            for j in i..d {
                cov[i * d + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i * d + j] /= n as f64;
            cov[j * d + i] = cov[i * d + j];
        }
    }

    let mut v: Vec<f64> = (0..d).map(|i| cov[i * d + i].sqrt() + 1e-3 * (i + 1) as f64).collect();
    normalize(&mut v);
    for _ in 0..500 {
        let mut next: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| cov[i * d + j] * v[j]).sum())
            .collect();
        if normalize(&mut next) == 0.0 {
            return vec![0.0; n];
        }
        let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if delta < 1e-13 {
            break;
        }
    }
    let lead = v
        .iter()
        .copied()
        .fold(0.0f64, |acc, c| if c.abs() > acc.abs() { c } else { acc });
    if lead < 0.0 {
        v.iter_mut().for_each(|c| *c = -*c);
    }

    let proj: Vec<f64> = centered
        .chunks_exact(d)
        .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
        .collect();
    let mean = proj.iter().sum::<f64>() / n as f64;
    let sd = (proj.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if sd <= f64::EPSILON {
        return vec![0.0; n];
    }
    proj.into_iter().map(|p| (p - mean) / sd).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|c| *c /= norm);
    }
    norm
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Keeps `⌈keep_fraction · n⌉` rows drawn without replacement with probability
/// proportional to `sigmoid(severity · z_i)`.
pub fn biased_subsample<T: Scalar>(
    data: &Dataset<T>,
    severity: f64,
    keep_fraction: f64,
    seed: u64,
) -> Result<SubsampleOutcome<T>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset("biased subsample"));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "keep_fraction must lie in (0, 1], got {keep_fraction}"
        )));
    }
    if !(severity >= 0.0 && severity.is_finite()) {
        return Err(Error::Config(format!("severity must be >= 0, got {severity}")));
    }
    let n = data.len();
    let keep = ((keep_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let keep = keep.min(n);

    let z = first_principal_scores(data);
    let weights: Vec<f64> = z.iter().map(|&zi| sigmoid(severity * zi)).collect();

    // Efraimidis–Spirakis: the k largest keys ln(u)/w form a weighted sample without replacement.
    let mut rng = seeds::rng(seed);
    let mut keyed: Vec<(f64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            (u.ln() / w, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut indices: Vec<usize> = keyed[..keep].iter().map(|&(_, i)| i).collect();
    indices.sort_unstable();

    let dataset = data.subset(&indices);
    let before = data.class_counts();
    let after = dataset.class_counts();
    let warnings = before
        .iter()
        .zip(&after)
        .enumerate()
        .filter(|(_, (&b, &a))| b > 0 && a == 0)
        .map(|(c, _)| format!("class {c} vanished after biased subsampling"))
        .collect();

    Ok(SubsampleOutcome {
        dataset,
        indices,
        selection_weights: weights,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::Matrix;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_1d(n: usize, seed: u64) -> Dataset<f64> {
        let mut rng = seeds::rng(seed);
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let labels = (0..n).map(|i| i % 2).collect();
        Dataset::new(Matrix::new(n, 1, xs).unwrap(), labels, 2).unwrap()
    }

    #[test]
    fn zero_severity_gives_equal_weights() {
        let d = normal_1d(200, 1);
        let out = biased_subsample(&d, 0.0, 0.3, 5).unwrap();
        assert!(out.selection_weights.iter().all(|&w| w == 0.5));
        assert_eq!(out.indices.len(), 60);
    }

    #[test]
    fn severity_favors_high_projection() {
        let d = normal_1d(1000, 2);
        let out = biased_subsample(&d, 4.0, 0.5, 9).unwrap();
        let z = first_principal_scores(&d);
        let mean_all = z.iter().sum::<f64>() / z.len() as f64;
        let mean_kept = out.indices.iter().map(|&i| z[i]).sum::<f64>() / out.indices.len() as f64;
        // brute-force expectation of z under the realized selection probabilities
        let wsum: f64 = out.selection_weights.iter().sum();
        let expected: f64 = out
            .selection_weights
            .iter()
            .zip(&z)
            .map(|(w, zi)| w * zi)
            .sum::<f64>()
            / wsum;
        assert!(expected > mean_all);
        assert!(mean_kept > mean_all, "kept {mean_kept} all {mean_all}");
    }

    #[test]
    fn determinism_and_size() {
        let d = normal_1d(103, 3);
        let a = biased_subsample(&d, 2.0, 0.25, 11).unwrap();
        let b = biased_subsample(&d, 2.0, 0.25, 11).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.indices.len(), 26);
        assert!(a.indices.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn vanished_class_is_a_warning() {
        let x = Matrix::new(4, 1, vec![-3.0, -2.9, 2.9, 3.0]).unwrap();
        let d = Dataset::new(x, vec![0, 0, 1, 1], 2).unwrap();
        let out = biased_subsample(&d, 50.0, 0.5, 0).unwrap();
        assert_eq!(out.indices, vec![2, 3]);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn principal_direction_follows_dominant_axis() {
        let mut rng = seeds::rng(4);
        let mut xs = Vec::new();
        for _ in 0..500 {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            xs.extend([0.1 * a, 5.0 * b]);
        }
        let d = Dataset::new(Matrix::new(500, 2, xs.clone()).unwrap(), vec![0; 500], 2).unwrap();
        let z = first_principal_scores(&d);
        let corr: f64 = z.iter().zip(xs.chunks(2)).map(|(zi, r)| zi * r[1]).sum::<f64>();
        assert!(corr > 0.0);
        let sd = (z.iter().map(|v| v * v).sum::<f64>() / 500.0).sqrt();
        assert!((sd - 1.0).abs() < 1e-9);
    }

    #[test]
    fn argument_errors() {
        let d = normal_1d(10, 0);
        assert!(biased_subsample(&d, 1.0, 0.0, 0).is_err());
        assert!(biased_subsample(&d, -1.0, 0.5, 0).is_err());
        let empty = Dataset::new(Matrix::<f64>::zeros(0, 1), vec![], 2).unwrap();
        assert!(biased_subsample(&empty, 1.0, 0.5, 0).is_err());
    }
}
