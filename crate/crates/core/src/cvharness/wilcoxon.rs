//! Two-sided Wilcoxon signed-rank test for paired samples.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{check_len, Error, Result};

/// Largest number of non-zero pairs handled by exact enumeration.
pub const EXACT_MAX_N: usize = 12;
pub const MIN_PAIRS: usize = 5;
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    Exact,
    Normal,
    /// Every difference was zero.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W⁺, W⁻)` over the non-zero differences.
    pub statistic: f64,
    pub w_plus: f64,
    pub n_nonzero: usize,
    pub p_value: f64,
    pub significant_at_5pct: bool,
    pub method: PValueMethod,
}

/// Average ranks of `values` (1-based), doubled so ties stay integral.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end+1 share the rank (start + end + 2) / 2
        let doubled = (start + end + 2) as u64;
        for &i in &order[start..=end] {
            ranks[i] = doubled;
        }
        start = end + 1;
    }
    ranks
}

/// Paired differences `a − b`; zeros are discarded and ties get average ranks.
///
/// Exact two-sided p-values by enumerating the sign-flip distribution for up to
/// [`EXACT_MAX_N`] pairs, and a continuity-corrected normal approximation with
/// tie correction above that.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    check_len("paired scores", a.len(), b.len())?;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("paired scores"));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            w_plus: 0.0,
            n_nonzero: 0,
            p_value: 1.0,
            significant_at_5pct: false,
            method: PValueMethod::Degenerate,
        });
    }
    if n < MIN_PAIRS {
        return Err(Error::Config(format!(
            "Wilcoxon test needs at least {MIN_PAIRS} non-zero differences, got {n}"
        )));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_ranks(&abs);
    let total2: u64 = ranks.iter().sum();
    let w_plus2: u64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| *r).sum();
    let w_plus = w_plus2 as f64 / 2.0;
    let w_minus = (total2 - w_plus2) as f64 / 2.0;

    let (p_value, method) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, total2, w_plus2), PValueMethod::Exact)
    } else {
        (normal_p(&abs, n, w_plus), PValueMethod::Normal)
    };
    Ok(WilcoxonResult {
        statistic: w_plus.min(w_minus),
        w_plus,
        n_nonzero: n,
        p_value,
        significant_at_5pct: p_value < SIGNIFICANCE_LEVEL,
        method,
    })
}

/// `P(|W⁺ − E W⁺| ≥ |w⁺ − E W⁺|)` under uniform random signs, by subset-sum counting.
fn exact_p(ranks2: &[u64], total2: u64, observed2: u64) -> f64 {
    let mut counts = vec![0u64; total2 as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in ranks2 {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let dev = (2 * observed2 as i64 - total2 as i64).abs();
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, _)| (2 * s as i64 - total2 as i64).abs() >= dev)
        .map(|(_, &c)| c)
        .sum();
    extreme as f64 / 2f64.powi(ranks2.len() as i32)
}

fn normal_p(abs: &[f64], n: usize, w_plus: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut sorted = abs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
