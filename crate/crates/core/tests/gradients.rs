use ficsr::fisher::FisherDiagonal;
use ficsr::numcore::{cross_entropy, grad_loss, Activation, LayerShape, Matrix, Mlp};
use ficsr::prior::{ficsr_penalty, ficsr_penalty_grad, GlobalPrior, PenaltyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::*;

#[test]
fn loss_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let d = rng.random_range(1..5);
        let hidden = rng.random_range(1..6);
        let classes = rng.random_range(2..5);
        let n = rng.random_range(1..8);
        let mut shapes = vec![LayerShape { input: d, output: hidden }];
        if case % 3 == 0 {
            shapes.push(LayerShape { input: hidden, output: hidden });
        }
        shapes.push(LayerShape { input: hidden, output: classes });
        let activation = if case % 2 == 0 { Activation::Tanh } else { Activation::Relu };
        let mut model = Mlp::<f64>::init(&shapes, activation, case).unwrap();
        for v in model.params_mut().values_mut() {
            *v += rng.random_range(-0.5..0.5);
        }
        let xs: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x = Matrix::new(n, d, xs).unwrap();
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();

        let analytic = grad_loss(&model, &x, &y, None).unwrap();
        let theta = model.params().values().to_vec();
        let numeric = central_diff(&theta, 1e-6, |t| {
            let m = model.with_values(t.to_vec()).unwrap();
            cross_entropy(&m.forward(&x).unwrap(), &y).unwrap()
        });
        let e = rel_err(analytic.values(), &numeric);
        assert!(e < 1e-4, "case {case}: relative error {e}");
        worst = worst.max(e);
    }
    println!("worst loss-gradient relative error {worst:.3e}");
}

#[test]
fn penalty_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..100 {
        let len = rng.random_range(1..30);
        let theta_fit: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0)).collect();
        let f: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..2.0)).collect();
        let mut prior = GlobalPrior::<f64>::new(len).unwrap();
        prior.accumulate(&theta_fit, &FisherDiagonal::new(f, 10).unwrap()).unwrap();
        let config = PenaltyConfig::with_lambda(rng.random_range(0.001..1.0));
        let theta: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0)).collect();

        let analytic = ficsr_penalty_grad(&prior, &theta, &config).unwrap();
        let numeric = central_diff(&theta, 1e-3, |t| ficsr_penalty(&prior, t, &config).unwrap());
        let e = rel_err(&analytic, &numeric);
        assert!(e < 1e-8, "case {case}: relative error {e}");
    }
}

#[test]
fn penalized_gradient_adds_extra_term() {
    let shapes = [LayerShape { input: 2, output: 3 }, LayerShape { input: 3, output: 2 }];
    let model = Mlp::<f64>::init(&shapes, Activation::Relu, 5).unwrap();
    let x = Matrix::from_rows(&[vec![0.3, -1.0], vec![1.5, 0.2]]).unwrap();
    let y = [0, 1];
    let extra: Vec<f64> = (0..model.params().len()).map(|i| i as f64 * 0.01).collect();
    let plain = grad_loss(&model, &x, &y, None).unwrap();
    let with = grad_loss(&model, &x, &y, Some(&extra)).unwrap();
    for ((p, w), e) in plain.values().iter().zip(with.values()).zip(&extra) {
        assert_eq!(p + e, *w);
    }
}
