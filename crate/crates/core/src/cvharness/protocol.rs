use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method, Protocol};
use super::plan::{make_batch_plan, make_fold_plan};
use super::runs::{
    ficsr_fragments, integral_accuracy, kfold_accuracies, noise_ablation, stcv_fragments,
    weighted_pool_accuracy, FicsrOptions,
};
use super::stats::{delta_percent, mean, summarize, variances, FragmentReport};
use super::trial::{prepare_trial, PreparedTrial};
use super::wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
use crate::error::Result;
use crate::importance::{rulsif_fit, weights_at};
use crate::seeds::{self, stream};

/// One method's fragment report within one trial and setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub trial: usize,
    pub seed: u64,
    /// Protocol setting, e.g. `ratio=0.05`, `k=5`, `lambda=0.1`, `std=10`.
    pub setting: String,
    pub method: Method,
    /// Penalty weight, present for penalized methods only.
    pub lambda: Option<f64>,
    /// What `report.baseline_accuracy` measures: `bl1`, `st_cv` or `erm`.
    pub baseline: String,
    pub report: FragmentReport,
}

/// Trial-level μ values of one (setting, method) pooled over trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub setting: String,
    pub method: Method,
    pub lambda: Option<f64>,
    pub trials: usize,
    pub mean_mu: f64,
    pub var_population: f64,
    pub var_sample: Option<f64>,
    pub mean_baseline: f64,
    /// Δ% of `mean_mu` against `mean_baseline`.
    pub delta_percent: f64,
}

/// Paired test over trial-level μ of `method_a` against `method_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonSummary {
    pub setting: String,
    pub method_a: Method,
    pub method_b: Method,
    pub result: Option<WilcoxonResult>,
    /// Why the test was skipped, when it was.
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClippedWeights {
    pub trial: usize,
    pub method: Method,
    pub clipped: usize,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutput {
    pub entries: Vec<ReportEntry>,
    pub aggregates: Vec<Aggregate>,
    pub wilcoxon: Vec<WilcoxonSummary>,
    pub warnings: Vec<String>,
    pub clipped_weights: Vec<ClippedWeights>,
    pub seeds: Vec<u64>,
}

#[derive(Default)]
struct TrialOutput {
    entries: Vec<ReportEntry>,
    warnings: Vec<String>,
    clipped: Vec<ClippedWeights>,
}

struct Ctx<'a> {
    config: &'a ExperimentConfig,
    trial: PreparedTrial<f64>,
    out: TrialOutput,
}

impl Ctx<'_> {
    fn push(
        &mut self,
        setting: &str,
        method: Method,
        lambda: Option<f64>,
        baseline_name: &str,
        accuracies: &[f64],
        baseline: f64,
    ) -> Result<FragmentReport> {
        let report = summarize(accuracies, baseline)?;
        self.out.entries.push(ReportEntry {
            trial: self.trial.trial,
            seed: self.trial.seed,
            setting: setting.to_string(),
            method,
            lambda,
            baseline: baseline_name.to_string(),
            report: report.clone(),
        });
        Ok(report)
    }

    fn bl1(&mut self) -> Result<f64> {
        let acc = integral_accuracy(self.config, &self.trial)?;
        self.push("integral", Method::StCv, None, "bl1", &[acc], acc)?;
        Ok(acc)
    }

    fn batch_plan(&self, ratio: f64) -> Result<super::FragmentPlan> {
        make_batch_plan(self.trial.train.len(), ratio, seeds::derive(self.trial.seed, stream::PLAN, 0))
    }

    fn fold_plan(&self, k: usize) -> Result<super::FragmentPlan> {
        make_fold_plan(self.trial.train.len(), k, seeds::derive(self.trial.seed, stream::PLAN, 1))
    }

    fn ficsr(&mut self, plan: &super::FragmentPlan, opts: &FicsrOptions) -> Result<Vec<f64>> {
        let run = ficsr_fragments(self.config, &self.trial, plan, opts)?;
        self.out.warnings.extend(run.warnings);
        Ok(run.accuracies)
    }
}

fn ratio_setting(r: f64) -> String {
    format!("ratio={r}")
}

fn run_trial(config: &ExperimentConfig, t: usize) -> Result<TrialOutput> {
    let trial = prepare_trial::<f64>(config, t)?;
    let mut ctx = Ctx {
        config,
        out: TrialOutput { warnings: trial.warnings.clone(), ..Default::default() },
        trial,
    };
    let opts = FicsrOptions::from_config(config);
    let lambda = Some(opts.penalty.lambda);
    match config.protocol {
        Protocol::E1 | Protocol::E2 => {
            let bl1 = ctx.bl1()?;
            for &r in &config.ratios {
                let plan = ctx.batch_plan(r)?;
                let st = stcv_fragments(config, &ctx.trial, &plan)?;
                let st_mu = ctx.push(&ratio_setting(r), Method::StCv, None, "bl1", &st, bl1)?.mean_mu;
                if config.protocol == Protocol::E2 {
                    let acc = ctx.ficsr(&plan, &opts)?;
                    ctx.push(&ratio_setting(r), Method::Ficsr, lambda, "st_cv", &acc, st_mu)?;
                }
            }
        }
        Protocol::E3 | Protocol::E4 => {
            let bl1 = if config.protocol == Protocol::E3 { Some(ctx.bl1()?) } else { None };
            for &k in &config.folds {
                let plan = ctx.fold_plan(k)?;
                let setting = format!("k={k}");
                let st = kfold_accuracies(config, &ctx.trial, &plan, Method::StCv, &opts)?;
                let st_mu = match bl1 {
                    Some(b) => ctx.push(&setting, Method::StCv, None, "bl1", &st, b)?.mean_mu,
                    None => ctx.push(&setting, Method::StCv, None, "st_cv", &st, mean(&st))?.mean_mu,
                };
                if config.protocol == Protocol::E4 {
                    let acc = kfold_accuracies(config, &ctx.trial, &plan, Method::Ficsr, &opts)?;
                    ctx.push(&setting, Method::Ficsr, lambda, "st_cv", &acc, st_mu)?;
                }
            }
        }
        Protocol::LambdaSweep => {
            let plan = ctx.batch_plan(config.ratios[0])?;
            let st = stcv_fragments(config, &ctx.trial, &plan)?;
            let st_mu = mean(&st);
            ctx.push(&ratio_setting(config.ratios[0]), Method::StCv, None, "st_cv", &st, st_mu)?;
            for &l in &config.lambda_grid {
                let mut o = opts;
                o.penalty.lambda = l;
                let acc = ctx.ficsr(&plan, &o)?;
                ctx.push(&format!("lambda={l}"), Method::Ficsr, Some(l), "st_cv", &acc, st_mu)?;
            }
        }
        Protocol::NoiseAblation => {
            let plan = ctx.batch_plan(config.ratios[0])?;
            for level in noise_ablation(config, &ctx.trial, &plan, &config.noise_stds)? {
                let setting = format!("std={}", level.std);
                let base = level.stcv.baseline_accuracy;
                ctx.push(&setting, Method::StCv, None, "bl1", &level.stcv.per_fragment_accuracy, base)?;
                ctx.push(&setting, Method::Ficsr, lambda, "bl1", &level.ficsr.per_fragment_accuracy, base)?;
            }
        }
        Protocol::BenchmarkBaselines => baselines(&mut ctx, &opts)?,
    }
    Ok(ctx.out)
}

fn baselines(ctx: &mut Ctx<'_>, opts: &FicsrOptions) -> Result<()> {
    let config = ctx.config;
    let erm = integral_accuracy(config, &ctx.trial)?;
    let imp = &config.importance;
    let setting = ratio_setting(config.ratios[0]);
    for &method in &config.methods {
        let (acc, lambda): (Vec<f64>, Option<f64>) = match method {
            Method::Erm => (vec![erm], None),
            Method::Iwerm | Method::Eiwerm | Method::Riwerm => {
                let mixture = if method == Method::Riwerm { imp.mixture } else { 0.0 };
                let model = rulsif_fit(
                    ctx.trial.train.features(),
                    ctx.trial.validation.features(),
                    mixture,
                    imp.kernel_width,
                    imp.ridge,
                    imp.m_centers,
                    seeds::derive(ctx.trial.seed, stream::IMPORTANCE, 0),
                )?;
                let w = weights_at(&model, ctx.trial.train.features())?;
                ctx.out.clipped.push(ClippedWeights {
                    trial: ctx.trial.trial,
                    method,
                    clipped: w.clipped_count,
                    n: w.len(),
                });
                let exponent = if method == Method::Eiwerm { imp.flatten_exponent } else { 1.0 };
                let values = w.flattened(exponent);
                (vec![weighted_pool_accuracy(config, &ctx.trial, Some(&values))?], None)
            }
            Method::StCv => {
                let plan = ctx.batch_plan(config.ratios[0])?;
                (stcv_fragments(config, &ctx.trial, &plan)?, None)
            }
            Method::Ficsr => {
                let plan = ctx.batch_plan(config.ratios[0])?;
                (ctx.ficsr(&plan, opts)?, Some(opts.penalty.lambda))
            }
        };
        ctx.push(&setting, method, lambda, "erm", &acc, erm)?;
    }
    Ok(())
}

fn aggregate(entries: &[ReportEntry]) -> Vec<Aggregate> {
    let mut keys: Vec<(String, Method, Option<f64>)> = Vec::new();
    for e in entries {
        let key = (e.setting.clone(), e.method, e.lambda);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(setting, method, lambda)| {
            let group: Vec<&ReportEntry> = entries
                .iter()
                .filter(|e| e.setting == setting && e.method == method && e.lambda == lambda)
                .collect();
            let mus: Vec<f64> = group.iter().map(|e| e.report.mean_mu).collect();
            let bases: Vec<f64> = group.iter().map(|e| e.report.baseline_accuracy).collect();
            let (var_population, var_sample) = variances(&mus);
            let mean_mu = mean(&mus);
            let mean_baseline = mean(&bases);
            Aggregate {
                setting,
                method,
                lambda,
                trials: group.len(),
                mean_mu,
                var_population,
                var_sample,
                mean_baseline,
                delta_percent: delta_percent(mean_mu, mean_baseline),
            }
        })
        .collect()
}

fn paired_tests(config: &ExperimentConfig, entries: &[ReportEntry]) -> Vec<WilcoxonSummary> {
    let mus = |setting: &str, method: Method| -> Vec<f64> {
        entries
            .iter()
            .filter(|e| e.setting == setting && e.method == method)
            .map(|e| e.report.mean_mu)
            .collect()
    };
    let mut pairs: Vec<(String, Method, Method, String)> = Vec::new();
    match config.protocol {
        Protocol::E2 => {
            for &r in &config.ratios {
                let s = ratio_setting(r);
                pairs.push((s.clone(), Method::Ficsr, Method::StCv, s));
            }
        }
        Protocol::E4 => {
            for &k in &config.folds {
                let s = format!("k={k}");
                pairs.push((s.clone(), Method::Ficsr, Method::StCv, s));
            }
        }
        Protocol::NoiseAblation => {
            for &std in &config.noise_stds {
                let s = format!("std={std}");
                pairs.push((s.clone(), Method::Ficsr, Method::StCv, s));
            }
        }
        Protocol::LambdaSweep => {
            let base = ratio_setting(config.ratios[0]);
            for &l in &config.lambda_grid {
                pairs.push((format!("lambda={l}"), Method::Ficsr, Method::StCv, base.clone()));
            }
        }
        Protocol::BenchmarkBaselines if config.methods.contains(&Method::Ficsr) => {
            let s = ratio_setting(config.ratios[0]);
            for &m in config.methods.iter().filter(|&&m| m != Method::Ficsr) {
                pairs.push((s.clone(), Method::Ficsr, m, s.clone()));
            }
        }
        _ => {}
    }
    pairs
        .into_iter()
        .map(|(setting_a, a, b, setting_b)| {
            let (result, note) = match wilcoxon_signed_rank(&mus(&setting_a, a), &mus(&setting_b, b)) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            WilcoxonSummary { setting: setting_a, method_a: a, method_b: b, result, note }
        })
        .collect()
}

/// Runs every trial of `config` (in parallel) and merges the results in trial order.
pub fn run_protocol(config: &ExperimentConfig) -> Result<ProtocolOutput> {
    config.validate()?;
    let trials: Vec<TrialOutput> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;
    let mut out = ProtocolOutput {
        seeds: (0..config.trials).map(|t| config.trial_seed(t)).collect(),
        ..Default::default()
    };
    for (t, trial) in trials.into_iter().enumerate() {
        out.entries.extend(trial.entries);
        out.warnings.extend(trial.warnings.into_iter().map(|w| format!("trial {t}: {w}")));
        out.clipped_weights.extend(trial.clipped);
    }
    out.aggregates = aggregate(&out.entries);
    out.wilcoxon = paired_tests(config, &out.entries);
    Ok(out)
}
