//! Independent reference computations shared by the test targets.
#![allow(dead_code)]

use ficsr::numcore::{Activation, LayerShape, Mlp, ParamVector};

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(1e-12)
}

pub fn central_diff(theta: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            t[j] = theta[j] + h;
            let up = f(&t);
            t[j] = theta[j] - h;
            let down = f(&t);
            t[j] = theta[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// KL(N(μ₁, s₁²) ‖ N(μ₂, s₂²)) from the general two-Gaussian formula.
pub fn gaussian_kl(mu1: f64, s1: f64, mu2: f64, s2: f64) -> f64 {
    (s2 / s1).ln() + (s1 * s1 + (mu1 - mu2).powi(2)) / (2.0 * s2 * s2) - 0.5
}

/// Two-class softmax on a constant zero input with bias logits `(0, ln(p/(1−p)))`.
pub fn bernoulli_model(p: f64) -> Mlp<f64> {
    let shapes = [LayerShape { input: 1, output: 2 }];
    let params = ParamVector::from_values(&shapes, vec![0.0, 0.0, 0.0, (p / (1.0 - p)).ln()]).unwrap();
    Mlp::from_params(params, Activation::Relu).unwrap()
}

/// Two-sided Wilcoxon p-value by listing all 2ⁿ sign assignments of the average ranks.
pub fn enumeration_p(diffs: &[f64]) -> f64 {
    let nz: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nz.len();
    let abs: Vec<f64> = nz.iter().map(|d| d.abs()).collect();
    let ranks: Vec<f64> = abs
        .iter()
        .map(|&a| {
            let below = abs.iter().filter(|&&b| b < a).count() as f64;
            let equal = abs.iter().filter(|&&b| b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let observed: f64 = ranks.iter().zip(&nz).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let dev = (observed - total / 2.0).abs();
    let mut extreme = 0u64;
    for mask in 0u32..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (w - total / 2.0).abs() >= dev {
            extreme += 1;
        }
    }
    extreme as f64 / (1u64 << n) as f64
}

/// Every index in `0..n` appears in exactly one fragment.
pub fn covers(fragments: &[Vec<usize>], n: usize) -> bool {
    let mut seen = vec![false; n];
    for &i in fragments.iter().flatten() {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    seen.into_iter().all(|s| s)
}

/// True density ratio of N(0.5, 1) over N(0, 1).
pub fn shifted_gaussian_ratio(x: f64) -> f64 {
    (0.5 * x - 0.125).exp()
}
