use ficsr::cvharness::{
    ficsr_fragments, kfold_accuracies, lambda_sweep, make_batch_plan, make_fold_plan, noise_ablation,
    prepare_trial, run_fragmented_stcv, run_ficsr_sequential, run_integral_cv, run_protocol,
    stcv_fragments, ExperimentConfig, FicsrOptions, Method, Protocol,
};
use ficsr::prior::PenaltyConfig;
use ficsr::shiftlab::{ShiftKind, ShiftSpec};

fn small(protocol: Protocol, sep: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::blobs(protocol, 300, 3, sep);
    c.train.epochs = 300;
    c.train.learning_rate = 0.01;
    c.ratios = vec![0.2];
    c.folds = vec![3];
    c
}

fn no_penalty() -> FicsrOptions {
    FicsrOptions { penalty: PenaltyConfig::with_lambda(0.0), warm_start: false }
}

#[test]
fn separable_blobs_are_learned() {
    let mut c = ExperimentConfig::blobs(Protocol::E1, 400, 2, 6.0);
    c.train.learning_rate = 0.01;
    let trial = prepare_trial::<f64>(&c, 0).unwrap();
    let r = run_integral_cv(&c, &trial).unwrap();
    assert!(r.mean_mu >= 0.99, "accuracy {}", r.mean_mu);
    assert_eq!(r.delta_percent, 0.0);

    let plan = make_fold_plan(trial.train.len(), 2, 1).unwrap();
    let folds = kfold_accuracies(&c, &trial, &plan, Method::StCv, &no_penalty()).unwrap();
    assert!(folds.iter().all(|&a| a >= 0.95), "{folds:?}");
    for (acc, fold) in folds.iter().zip(&plan.fragments) {
        let hits = acc * fold.len() as f64;
        assert!((hits - hits.round()).abs() < 1e-9);
    }
}

#[test]
fn zero_lambda_without_warm_start_is_stcv() {
    let mut c = small(Protocol::E2, 2.0);
    c.shift = ShiftSpec { kind: ShiftKind::BiasedSubsample { severity: 2.0, keep_fraction: 0.5 }, seed: 3 };
    let trial = prepare_trial::<f64>(&c, 1).unwrap();
    let plan = make_batch_plan(trial.train.len(), 0.25, 4).unwrap();
    let st = stcv_fragments(&c, &trial, &plan).unwrap();
    let run = ficsr_fragments(&c, &trial, &plan, &no_penalty()).unwrap();
    assert_eq!(st, run.accuracies);
    assert_eq!(run.prior.fragments_seen(), plan.len());

    let folds = make_fold_plan(trial.train.len(), 3, 5).unwrap();
    let a = kfold_accuracies(&c, &trial, &folds, Method::StCv, &no_penalty()).unwrap();
    let b = kfold_accuracies(&c, &trial, &folds, Method::Ficsr, &no_penalty()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_fragment_has_zero_variance() {
    let c = small(Protocol::E1, 2.0);
    let trial = prepare_trial::<f64>(&c, 0).unwrap();
    let plan = make_batch_plan(trial.train.len(), 1.0, 0).unwrap();
    let r = run_fragmented_stcv(&c, &trial, &plan, 0.9).unwrap();
    assert_eq!(r.per_fragment_accuracy.len(), 1);
    assert_eq!(r.mean_mu, r.per_fragment_accuracy[0]);
    assert_eq!(r.var_population, 0.0);
    assert_eq!(r.var_sample, None);
}

#[test]
fn lambda_grid_shares_plans_and_reduces_at_zero() {
    let c = small(Protocol::LambdaSweep, 2.0);
    let trial = prepare_trial::<f64>(&c, 0).unwrap();
    let plan = make_batch_plan(trial.train.len(), 0.25, 9).unwrap();
    let sweep = lambda_sweep(&c, &trial, &plan, &[0.0], 0.8).unwrap();
    let warm = FicsrOptions { penalty: PenaltyConfig::with_lambda(0.0), warm_start: true };
    let direct = run_ficsr_sequential(&c, &trial, &plan, &warm, 0.8).unwrap();
    assert_eq!(sweep[0].1, direct);
    assert!(lambda_sweep(&c, &trial, &plan, &[], 0.8).is_err());
}

#[test]
fn zero_noise_level_is_the_clean_run() {
    let c = small(Protocol::NoiseAblation, 2.0);
    let trial = prepare_trial::<f64>(&c, 0).unwrap();
    let plan = make_batch_plan(trial.train.len(), 0.25, 2).unwrap();
    let levels = noise_ablation(&c, &trial, &plan, &[0.0, 5.0]).unwrap();
    let clean = stcv_fragments(&c, &trial, &plan).unwrap();
    assert_eq!(levels[0].stcv.per_fragment_accuracy, clean);
    let a = trial.with_noise(5.0, 0).unwrap();
    let b = trial.with_noise(5.0, 0).unwrap();
    assert_eq!(a.train, b.train);
    assert_ne!(a.train, trial.train);
    assert_eq!(a.validation, trial.validation);
}

#[test]
fn standardization_uses_training_statistics() {
    let c = small(Protocol::E1, 2.0);
    let trial = prepare_trial::<f64>(&c, 0).unwrap();
    let means = trial.train.features().column_means();
    assert!(means.iter().all(|m| m.abs() < 1e-12));
    let val_means = trial.validation.features().column_means();
    assert!(val_means.iter().any(|m| m.abs() > 1e-6));
}

#[test]
fn protocols_are_deterministic_and_record_trials() {
    let mut c = small(Protocol::E2, 2.0);
    c.trials = 3;
    c.base_seed = 40;
    let a = run_protocol(&c).unwrap();
    let b = run_protocol(&c).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.seeds, vec![40, 41, 42]);
    let bl1: Vec<f64> = a.entries.iter().filter(|e| e.setting == "integral").map(|e| e.report.mean_mu).collect();
    assert_eq!(bl1.len(), 3);

    for protocol in Protocol::ALL {
        let mut c = small(protocol, 2.0);
        c.train.epochs = 20;
        c.lambda_grid = vec![0.1];
        c.noise_stds = vec![0.0, 1.0];
        let out = run_protocol(&c).unwrap();
        assert!(!out.entries.is_empty(), "{}", protocol.name());
        assert!(!out.aggregates.is_empty());
    }
}

#[test]
fn rotation_needs_images_and_runs_on_bars() {
    let mut c = small(Protocol::E1, 2.0);
    c.shift = ShiftSpec { kind: ShiftKind::BetaRotation { a: 2.0, b: 4.0 }, seed: 0 };
    assert!(c.validate().is_err());
    c.dataset = ficsr::cvharness::DatasetSource::BarImages { n: 120, size: 5 };
    c.train.epochs = 50;
    let trial = prepare_trial::<f64>(&c, 0).unwrap();
    assert_eq!(trial.train.dim(), 25);
    assert!(run_protocol(&c).is_ok());
}
