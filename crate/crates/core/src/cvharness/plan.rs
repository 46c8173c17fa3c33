use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;

/// Slack for ratios like 0.05 whose binary value sits just under the intended quotient.
const RATIO_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FragmentMode {
    Batch,
    Fold,
}

/// Ordered partition of `0..n` into batches or folds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FragmentPlan {
    pub mode: FragmentMode,
    pub fragments: Vec<Vec<usize>>,
    /// Batch ratio or fold count used to build the plan.
    pub ratio_or_k: f64,
    pub seed: u64,
    pub n: usize,
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeds::rng(seed));
    idx
}

/// `⌊1/ratio⌋` fragments of `⌊n·ratio⌋` shuffled indices; the remainder joins the last one.
pub fn make_batch_plan(n: usize, ratio: f64, seed: u64) -> Result<FragmentPlan> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Config(format!("batch ratio must lie in (0, 1], got {ratio}")));
    }
    let count = (1.0 / ratio + RATIO_SLACK).floor() as usize;
    let size = (n as f64 * ratio + RATIO_SLACK).floor() as usize;
    if size == 0 {
        return Err(Error::Config(format!(
            "batch ratio {ratio} gives empty fragments for n = {n}"
        )));
    }
    let idx = shuffled(n, seed);
    let mut fragments: Vec<Vec<usize>> = (0..count)
        .map(|f| idx[f * size..(f + 1) * size].to_vec())
        .collect();
    fragments
        .last_mut()
        .expect("at least one fragment")
        .extend_from_slice(&idx[count * size..]);
    Ok(FragmentPlan {
        mode: FragmentMode::Batch,
        fragments,
        ratio_or_k: ratio,
        seed,
        n,
    })
}

/// Shuffled indices dealt round-robin into `k` folds; sizes differ by at most one.
pub fn make_fold_plan(n: usize, k: usize, seed: u64) -> Result<FragmentPlan> {
    if k < 2 {
        return Err(Error::Config(format!("fold count must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::Config(format!("fold count {k} exceeds n = {n}")));
    }
    let idx = shuffled(n, seed);
    let mut fragments = vec![Vec::with_capacity(n / k + 1); k];
    for (pos, &i) in idx.iter().enumerate() {
        fragments[pos % k].push(i);
    }
    Ok(FragmentPlan {
        mode: FragmentMode::Fold,
        fragments,
        ratio_or_k: k as f64,
        seed,
        n,
    })
}

impl FragmentPlan {
    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.fragments.iter().map(Vec::len).collect()
    }

    /// Checks disjointness, coverage of `0..n`, and the per-mode size rule.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n];
        for frag in &self.fragments {
            if frag.is_empty() {
                return Err(Error::Config("plan contains an empty fragment".into()));
            }
            for &i in frag {
                if i >= self.n || seen[i] {
                    return Err(Error::Config(format!("index {i} is out of range or repeated")));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!("index {missing} is not covered")));
        }
        let sizes = self.sizes();
        match self.mode {
            FragmentMode::Fold => {
                let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
                if hi - lo > 1 {
                    return Err(Error::Config(format!("fold sizes {lo}..{hi} differ by more than 1")));
                }
            }
            FragmentMode::Batch => {
                let head = sizes[0];
                if sizes[..sizes.len() - 1].iter().any(|&s| s != head) || *sizes.last().unwrap() < head {
                    return Err(Error::Config("batch sizes violate the remainder rule".into()));
                }
            }
        }
        Ok(())
    }

    /// Indices outside fragment `i`, for k-fold training.
    pub fn complement(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .fragments
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}
