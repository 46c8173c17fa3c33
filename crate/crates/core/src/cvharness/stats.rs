use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-fragment accuracies with their summary against a baseline.
///
/// Accuracies are fractions in `[0, 1]`; `delta_percent` is `100·(μ − baseline)/baseline`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FragmentReport {
    pub per_fragment_accuracy: Vec<f64>,
    pub mean_mu: f64,
    /// Population variance (divisor n).
    pub var_population: f64,
    /// Sample variance (divisor n − 1); undefined for a single value.
    pub var_sample: Option<f64>,
    pub baseline_accuracy: f64,
    pub delta_percent: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// `(population, sample)` variances; the sample variance needs two values.
pub fn variances(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    let sample = (values.len() > 1).then(|| ss / (n - 1.0));
    (ss / n, sample)
}

pub fn delta_percent(mu: f64, baseline: f64) -> f64 {
    100.0 * (mu - baseline) / baseline
}

pub fn summarize(accuracies: &[f64], baseline: f64) -> Result<FragmentReport> {
    if accuracies.is_empty() {
        return Err(Error::Config("summarize needs at least one accuracy".into()));
    }
    if !(baseline > 0.0) {
        return Err(Error::Config(format!("baseline must be positive, got {baseline}")));
    }
    let mean_mu = mean(accuracies);
    let (var_population, var_sample) = variances(accuracies);
    Ok(FragmentReport {
        per_fragment_accuracy: accuracies.to_vec(),
        mean_mu,
        var_population,
        var_sample,
        baseline_accuracy: baseline,
        delta_percent: delta_percent(mean_mu, baseline),
    })
}
