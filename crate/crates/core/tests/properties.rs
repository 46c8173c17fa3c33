use ficsr::cvharness::{make_batch_plan, make_fold_plan, summarize};
use ficsr::fisher::FisherDiagonal;
use ficsr::numcore::{Matrix, Mlp, per_example_losses, Activation, LayerShape};
use ficsr::prior::{ficsr_penalty, GlobalPrior, PenaltyConfig};
use ficsr::shiftlab::{biased_subsample, gaussian_noise_inject};
use ficsr::Dataset;
use proptest::prelude::*;

mod common;
use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn batch_plans_partition(n in 1usize..400, ratio in 0.001f64..=1.0, seed in any::<u64>()) {
        let size = (n as f64 * ratio + 1e-9).floor() as usize;
        match make_batch_plan(n, ratio, seed) {
            Ok(plan) => {
                let count = (1.0 / ratio + 1e-9).floor() as usize;
                prop_assert!(covers(&plan.fragments, n));
                prop_assert_eq!(plan.len(), count);
                let sizes = plan.sizes();
                prop_assert!(sizes[..count - 1].iter().all(|&s| s == size));
                prop_assert_eq!(sizes[count - 1], n - size * (count - 1));
                prop_assert!(plan.validate().is_ok());
            }
            Err(_) => prop_assert_eq!(size, 0),
        }
    }

    #[test]
    fn fold_plans_partition(n in 2usize..400, k_raw in 2usize..400, seed in any::<u64>()) {
        let k = 2 + k_raw % (n - 1);
        let plan = make_fold_plan(n, k, seed).unwrap();
        prop_assert!(covers(&plan.fragments, n));
        prop_assert_eq!(plan.len(), k);
        let sizes = plan.sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for i in 0..k {
            let rest = plan.complement(i);
            prop_assert_eq!(rest.len() + plan.fragments[i].len(), n);
            prop_assert!(rest.iter().all(|r| !plan.fragments[i].contains(r)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn prior_mean_ignores_order(
        fits in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 6), 1..8),
        rot in 0usize..8,
    ) {
        let fishers: Vec<Vec<f64>> = fits.iter().map(|t| t.iter().map(|v| v.abs()).collect()).collect();
        let mut forward = GlobalPrior::<f64>::new(3).unwrap();
        for (t, f) in fits.iter().zip(&fishers) {
            forward.accumulate(&t[..3], &FisherDiagonal::new(f[3..].to_vec(), 1).unwrap()).unwrap();
        }
        let mut order: Vec<usize> = (0..fits.len()).rev().collect();
        order.rotate_left(rot % fits.len());
        let mut shuffled = GlobalPrior::<f64>::new(3).unwrap();
        for &i in &order {
            shuffled.accumulate(&fits[i][..3], &FisherDiagonal::new(fishers[i][3..].to_vec(), 1).unwrap()).unwrap();
        }
        for (a, b) in forward.theta_bar().iter().zip(shuffled.theta_bar()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in forward.fisher_bar().iter().zip(shuffled.fisher_bar()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        prop_assert_eq!(forward.fragments_seen(), fits.len());
    }

    #[test]
    fn penalty_is_non_negative(
        theta in proptest::collection::vec(-10.0f64..10.0, 4),
        anchor in proptest::collection::vec(-10.0f64..10.0, 4),
        f in proptest::collection::vec(0.0f64..5.0, 4),
        lambda in 0.0f64..2.0,
    ) {
        let mut prior = GlobalPrior::<f64>::new(4).unwrap();
        prior.accumulate(&anchor, &FisherDiagonal::new(f, 1).unwrap()).unwrap();
        let p = ficsr_penalty(&prior, &theta, &PenaltyConfig::with_lambda(lambda)).unwrap();
        prop_assert!(p >= 0.0);
        prop_assert_eq!(ficsr_penalty(&prior, &anchor, &PenaltyConfig::with_lambda(lambda)).unwrap(), 0.0);
    }

    #[test]
    fn softmax_rows_are_distributions(xs in proptest::collection::vec(-50.0f64..50.0, 12), seed in any::<u64>()) {
        let shapes = [LayerShape { input: 3, output: 5 }, LayerShape { input: 5, output: 4 }];
        let model = Mlp::<f64>::init(&shapes, Activation::Relu, seed).unwrap();
        let probs = model.forward(&Matrix::new(4, 3, xs).unwrap()).unwrap();
        for row in probs.iter_rows() {
            prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let losses = per_example_losses(&probs, &[0, 1, 2, 3]).unwrap();
        prop_assert!(losses.iter().all(|l| *l >= 0.0 && *l <= -(1e-12f64).ln() + 1e-9));
    }

    #[test]
    fn summary_matches_definitions(acc in proptest::collection::vec(0.0f64..=1.0, 1..20), base in 0.01f64..=1.0) {
        let r = summarize(&acc, base).unwrap();
        let n = acc.len() as f64;
        let mu = acc.iter().sum::<f64>() / n;
        let ss: f64 = acc.iter().map(|a| (a - mu).powi(2)).sum();
        prop_assert!((r.mean_mu - mu).abs() < 1e-12);
        prop_assert!((r.var_population - ss / n).abs() < 1e-12);
        prop_assert!((r.delta_percent - 100.0 * (mu - base) / base).abs() < 1e-9);
    }

    #[test]
    fn shifts_keep_shapes(n in 4usize..80, severity in 0.0f64..5.0, keep in 0.05f64..=1.0, seed in any::<u64>()) {
        let xs: Vec<f64> = (0..n * 2).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let data = Dataset::new(Matrix::new(n, 2, xs).unwrap(), labels, 2).unwrap();
        let out = biased_subsample(&data, severity, keep, seed).unwrap();
        prop_assert_eq!(out.dataset.len(), ((keep * n as f64) - 1e-9).ceil().max(1.0) as usize);
        prop_assert!(out.indices.windows(2).all(|w| w[0] < w[1]));
        let noisy = gaussian_noise_inject(&data, 3.0, seed).unwrap();
        prop_assert_eq!(noisy.labels(), data.labels());
        prop_assert_eq!(noisy.dim(), data.dim());
    }
}
