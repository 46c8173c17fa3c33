use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, Matrix};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;
use crate::seeds;

/// Probabilities are floored here before taking the log in the loss.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerShape {
    pub input: usize,
    pub output: usize,
}

impl LayerShape {
    pub const fn new(input: usize, output: usize) -> Self {
        Self { input, output }
    }

    #[inline]
    pub fn param_count(&self) -> usize {
        self.input * self.output + self.output
    }
}

impl From<(usize, usize)> for LayerShape {
    fn from((input, output): (usize, usize)) -> Self {
        Self { input, output }
    }
}

/// Every weight and bias of an MLP in one flat vector.
///
/// Layer `l` occupies `input*output` weights stored row-major as `[i * output + o]`,
/// followed by `output` biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector<T> {
    shapes: Vec<LayerShape>,
    values: Vec<T>,
}

impl<T: Scalar> ParamVector<T> {
    pub fn zeros(shapes: &[LayerShape]) -> Self {
        let len = shapes.iter().map(LayerShape::param_count).sum();
        Self {
            shapes: shapes.to_vec(),
            values: vec![T::zero(); len],
        }
    }

    pub fn from_values(shapes: &[LayerShape], values: Vec<T>) -> Result<Self> {
        let len: usize = shapes.iter().map(LayerShape::param_count).sum();
        check_len("parameter vector", len, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameter vector"));
        }
        Ok(Self {
            shapes: shapes.to_vec(),
            values,
        })
    }

    #[inline]
    pub fn shapes(&self) -> &[LayerShape] {
        &self.shapes
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Offset of layer `l`'s first weight.
    pub fn layer_offset(&self, l: usize) -> usize {
        self.shapes[..l].iter().map(LayerShape::param_count).sum()
    }

    /// `(weights, biases)` of layer `l`.
    pub fn layer(&self, l: usize) -> (&[T], &[T]) {
        let off = self.layer_offset(l);
        let s = self.shapes[l];
        let w_end = off + s.input * s.output;
        (&self.values[off..w_end], &self.values[w_end..w_end + s.output])
    }

    /// Indices of all bias entries.
    pub fn bias_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut off = 0;
        for s in &self.shapes {
            let start = off + s.input * s.output;
            out.extend(start..start + s.output);
            off += s.param_count();
        }
        out
    }

    pub fn norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and the output `a`.
    #[inline]
    fn derivative<T: Scalar>(self, z: T, a: T) -> T {
        match self {
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - a * a,
        }
    }
}

/// Fully connected network; hidden layers use `activation`, the output layer feeds a softmax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp<T> {
    params: ParamVector<T>,
    activation: Activation,
    n_classes: usize,
}

/// Scratch buffers for one forward/backward pass.
pub(crate) struct Workspace<T> {
    pre: Vec<Vec<T>>,
    post: Vec<Vec<T>>,
    probs: Vec<T>,
    delta: Vec<T>,
    delta_prev: Vec<T>,
}

impl<T: Scalar> Workspace<T> {
    pub(crate) fn new(shapes: &[LayerShape]) -> Self {
        let widest = shapes
            .iter()
            .map(|s| s.input.max(s.output))
            .max()
            .unwrap_or(0);
        Self {
            pre: shapes.iter().map(|s| vec![T::zero(); s.output]).collect(),
            post: shapes.iter().map(|s| vec![T::zero(); s.input]).collect(),
            probs: vec![T::zero(); shapes.last().map_or(0, |s| s.output)],
            delta: Vec::with_capacity(widest),
            delta_prev: Vec::with_capacity(widest),
        }
    }
}

fn validate_chain(shapes: &[LayerShape]) -> Result<()> {
    if shapes.is_empty() {
        return Err(Error::Config("an MLP needs at least one layer".into()));
    }
    for (i, s) in shapes.iter().enumerate() {
        if s.input == 0 || s.output == 0 {
            return Err(Error::Config(format!("layer {i} has a zero dimension: {s:?}")));
        }
    }
    for (i, pair) in shapes.windows(2).enumerate() {
        if pair[0].output != pair[1].input {
            return Err(Error::Config(format!(
                "layer chain mismatch: layer {i} outputs {} but layer {} expects {}",
                pair[0].output,
                i + 1,
                pair[1].input
            )));
        }
    }
    let out = shapes.last().unwrap().output;
    if out < 2 {
        return Err(Error::Config(format!(
            "output layer needs at least 2 classes, got {out}"
        )));
    }
    Ok(())
}

impl<T: Scalar> Mlp<T> {
    /// Weights drawn from `U(-√(6/(in+out)), √(6/(in+out)))`, biases zero.
    pub fn init(shapes: &[LayerShape], activation: Activation, seed: u64) -> Result<Self> {
        validate_chain(shapes)?;
        let mut params = ParamVector::zeros(shapes);
        let mut rng = seeds::rng(seed);
        let mut off = 0;
        for s in shapes {
            let bound = (6.0 / (s.input + s.output) as f64).sqrt();
            for w in &mut params.values[off..off + s.input * s.output] {
                *w = T::lit(rng.random_range(-bound..bound));
            }
            off += s.param_count();
        }
        Ok(Self {
            n_classes: shapes.last().unwrap().output,
            params,
            activation,
        })
    }

    pub fn from_params(params: ParamVector<T>, activation: Activation) -> Result<Self> {
        validate_chain(params.shapes())?;
        Ok(Self {
            n_classes: params.shapes().last().unwrap().output,
            params,
            activation,
        })
    }

    /// Same topology and activation, new parameter values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Ok(Self {
            params: ParamVector::from_values(self.params.shapes(), values)?,
            activation: self.activation,
            n_classes: self.n_classes,
        })
    }

    #[inline]
    pub fn params(&self) -> &ParamVector<T> {
        &self.params
    }

    #[inline]
    pub fn params_mut(&mut self) -> &mut ParamVector<T> {
        &mut self.params
    }

    #[inline]
    pub fn activation(&self) -> Activation {
        self.activation
    }

    #[inline]
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.params.shapes()[0].input
    }

    pub(crate) fn workspace(&self) -> Workspace<T> {
        Workspace::new(self.params.shapes())
    }

    /// Forward pass for one example; leaves softmax probabilities in `ws.probs`.
    fn forward_example(&self, x: &[T], ws: &mut Workspace<T>) {
        let shapes = self.params.shapes();
        let last = shapes.len() - 1;
        ws.post[0].copy_from_slice(x);
        for (l, s) in shapes.iter().enumerate() {
            let (w, b) = self.params.layer(l);
            let z = &mut ws.pre[l];
            z.copy_from_slice(b);
            for (i, &a) in ws.post[l].iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let row = &w[i * s.output..(i + 1) * s.output];
                for (zo, &wio) in z.iter_mut().zip(row) {
                    *zo += a * wio;
                }
            }
            if l < last {
                for (a, &zi) in ws.post[l + 1].iter_mut().zip(ws.pre[l].iter()) {
                    *a = self.activation.apply(zi);
                }
            }
        }
        softmax_into(&ws.pre[last], &mut ws.probs);
    }

    /// Adds `coef · ∂ℓ/∂θ` for one example to `grad` and returns the floored loss `ℓ`.
    pub(crate) fn accumulate_example(
        &self,
        x: &[T],
        y: usize,
        coef: T,
        grad: &mut [T],
        ws: &mut Workspace<T>,
    ) -> T {
        self.forward_example(x, ws);
        let loss = -ws.probs[y].max(T::lit(PROB_FLOOR)).ln();
        if coef == T::zero() {
            return loss;
        }
        let shapes = self.params.shapes();
        ws.delta.clear();
        ws.delta.extend_from_slice(&ws.probs);
        ws.delta[y] -= T::one();
        for l in (0..shapes.len()).rev() {
            let s = shapes[l];
            let off = self.params.layer_offset(l);
            let w_len = s.input * s.output;
            {
                let (gw, gb) = grad[off..off + s.param_count()].split_at_mut(w_len);
                for (g, &d) in gb.iter_mut().zip(&ws.delta) {
                    *g += coef * d;
                }
                for (i, &a) in ws.post[l].iter().enumerate() {
                    if a == T::zero() {
                        continue;
                    }
                    let ca = coef * a;
                    for (g, &d) in gw[i * s.output..(i + 1) * s.output].iter_mut().zip(&ws.delta) {
                        *g += ca * d;
                    }
                }
            }
            if l > 0 {
                let w = &self.params.values()[off..off + w_len];
                ws.delta_prev.clear();
                for i in 0..s.input {
                    let row = &w[i * s.output..(i + 1) * s.output];
                    let back: T = row.iter().zip(&ws.delta).map(|(&wio, &d)| wio * d).sum();
                    let z = ws.pre[l - 1][i];
                    let a = ws.post[l][i];
                    ws.delta_prev.push(back * self.activation.derivative(z, a));
                }
                std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
        loss
    }

    fn check_input(&self, x: &Matrix<T>) -> Result<()> {
        check_len("model input columns", self.input_dim(), x.cols())
    }

    /// Class probabilities, one row per input row.
    pub fn forward(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_input(x)?;
        let mut ws = self.workspace();
        let mut out = Vec::with_capacity(x.rows() * self.n_classes);
        for row in x.iter_rows() {
            self.forward_example(row, &mut ws);
            out.extend_from_slice(&ws.probs);
        }
        Matrix::new(x.rows(), self.n_classes, out)
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<usize>> {
        let probs = self.forward(x)?;
        Ok(probs.iter_rows().map(argmax).collect())
    }

    /// Fraction of correctly classified examples.
    pub fn accuracy(&self, data: &Dataset<T>) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset("accuracy"));
        }
        let pred = self.predict(data.features())?;
        let hits = pred
            .iter()
            .zip(data.labels())
            .filter(|(p, y)| p == y)
            .count();
        Ok(hits as f64 / data.len() as f64)
    }

    /// Mean loss and gradient over `data`, each example scaled by its weight if given.
    pub(crate) fn loss_and_grad(&self, data: &Dataset<T>, weights: Option<&[T]>) -> Result<(T, Vec<T>)> {
        self.check_input(data.features())?;
        check_labels(data.labels(), self.n_classes)?;
        if let Some(w) = weights {
            check_len("example weights", data.len(), w.len())?;
        }
        if data.is_empty() {
            return Err(Error::EmptyDataset("loss gradient"));
        }
        let inv_n = T::one() / T::from_usize(data.len()).unwrap();
        let mut grad = vec![T::zero(); self.params.len()];
        let mut ws = self.workspace();
        let mut total = T::zero();
        for (i, (row, &y)) in data.features().iter_rows().zip(data.labels()).enumerate() {
            let w = weights.map_or(T::one(), |w| w[i]);
            let loss = self.accumulate_example(row, y, w * inv_n, &mut grad, &mut ws);
            total += w * loss;
        }
        Ok((total * inv_n, grad))
    }
}

fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn softmax_into<T: Scalar>(logits: &[T], out: &mut [T]) {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for (o, &z) in out.iter_mut().zip(logits) {
        *o = (z - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

fn check_labels(labels: &[usize], n_classes: usize) -> Result<()> {
    match labels.iter().find(|&&l| l >= n_classes) {
        Some(&label) => Err(Error::Label { label, n_classes }),
        None => Ok(()),
    }
}

/// `−ln max(p_{i,y_i}, floor)` per row.
pub fn per_example_losses<T: Scalar>(probs: &Matrix<T>, labels: &[usize]) -> Result<Vec<T>> {
    check_len("labels", probs.rows(), labels.len())?;
    check_labels(labels, probs.cols())?;
    let floor = T::lit(PROB_FLOOR);
    Ok(probs
        .iter_rows()
        .zip(labels)
        .map(|(row, &y)| -row[y].max(floor).ln())
        .collect())
}

/// Mean negative log-probability of the true class.
pub fn cross_entropy<T: Scalar>(probs: &Matrix<T>, labels: &[usize]) -> Result<T> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset("cross entropy"));
    }
    let losses = per_example_losses(probs, labels)?;
    Ok(losses.iter().copied().sum::<T>() / T::from_usize(losses.len()).unwrap())
}

/// Gradient of the mean cross-entropy over `(x, y)`, plus `extra_penalty_grad` when given.
pub fn grad_loss<T: Scalar>(
    model: &Mlp<T>,
    x: &Matrix<T>,
    y: &[usize],
    extra_penalty_grad: Option<&[T]>,
) -> Result<ParamVector<T>> {
    check_len("labels", x.rows(), y.len())?;
    let data = Dataset::new(x.clone(), y.to_vec(), model.n_classes())?;
    let (_, mut grad) = model.loss_and_grad(&data, None)?;
    if let Some(extra) = extra_penalty_grad {
        check_len("penalty gradient", grad.len(), extra.len())?;
        for (g, &e) in grad.iter_mut().zip(extra) {
            *g += e;
        }
    }
    ParamVector::from_values(model.params().shapes(), grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shapes(list: &[(usize, usize)]) -> Vec<LayerShape> {
        list.iter().copied().map(LayerShape::from).collect()
    }

    #[test]
    fn init_is_deterministic_with_zero_biases() {
        let s = shapes(&[(2, 4), (4, 2)]);
        let a = Mlp::<f64>::init(&s, Activation::Relu, 7).unwrap();
        let b = Mlp::<f64>::init(&s, Activation::Relu, 7).unwrap();
        assert_eq!(a.params().values(), b.params().values());
        for i in a.params().bias_indices() {
            assert_eq!(a.params().values()[i], 0.0);
        }
        let bound = (6.0f64 / 6.0).sqrt();
        let (w, _) = a.params().layer(0);
        assert!(w.iter().all(|v| v.abs() <= bound));
        assert_eq!(a.params().len(), 2 * 4 + 4 + 4 * 2 + 2);
    }

    #[test]
    fn init_rejects_broken_chain() {
        let err = Mlp::<f64>::init(&shapes(&[(3, 4), (5, 2)]), Activation::Relu, 0).unwrap_err();
        assert!(matches!(err, Error::Config(msg) if msg.contains("chain mismatch")));
        assert!(Mlp::<f64>::init(&shapes(&[(3, 0), (0, 2)]), Activation::Relu, 0).is_err());
        assert!(Mlp::<f64>::init(&shapes(&[(3, 1)]), Activation::Relu, 0).is_err());
    }

    #[test]
    fn zero_model_is_uniform() {
        let s = shapes(&[(2, 4), (4, 3)]);
        let m = Mlp::from_params(ParamVector::<f64>::zeros(&s), Activation::Relu).unwrap();
        let x = Matrix::from_rows(&[vec![0.3, -1.0], vec![5.0, 2.0]]).unwrap();
        let p = m.forward(&x).unwrap();
        for v in p.as_slice() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn output_bias_shift_leaves_probabilities_unchanged() {
        let s = shapes(&[(2, 4), (4, 3)]);
        let m = Mlp::<f64>::init(&s, Activation::Relu, 3).unwrap();
        let mut shifted = m.clone();
        let off = shifted.params().layer_offset(1) + 4 * 3;
        for v in &mut shifted.params_mut().values_mut()[off..off + 3] {
            *v += 2.5;
        }
        let x = Matrix::from_rows(&[vec![0.7, -0.2]]).unwrap();
        let (a, b) = (m.forward(&x).unwrap(), shifted.forward(&x).unwrap());
        for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn forward_checks_dimensions() {
        let m = Mlp::<f64>::init(&shapes(&[(2, 2)]), Activation::Relu, 0).unwrap();
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(m.forward(&x), Err(Error::Shape { .. })));
    }

    #[test]
    fn cross_entropy_values() {
        let uniform = Matrix::new(2, 4, vec![0.25; 8]).unwrap();
        let ce = cross_entropy(&uniform, &[0, 3]).unwrap();
        assert!((ce - 4f64.ln()).abs() < 1e-15);
        assert!((ce - 1.386294).abs() < 1e-6);

        let onehot = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(cross_entropy(&onehot, &[0, 1]).unwrap(), 0.0);

        let p = Matrix::from_rows(&[vec![0.8f64, 0.2]]).unwrap();
        let ce = cross_entropy(&p, &[0]).unwrap();
        assert!((ce - 0.223144).abs() < 1e-6);

        assert!(matches!(
            cross_entropy(&p, &[2]),
            Err(Error::Label { label: 2, n_classes: 2 })
        ));
    }

    #[test]
    fn confident_mistake_is_floored() {
        let p = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let ce = cross_entropy(&p, &[1]).unwrap();
        assert!((ce + PROB_FLOOR.ln()).abs() < 1e-9);
    }

    #[test]
    fn zero_extra_gradient_is_identity() {
        let m = Mlp::<f64>::init(&shapes(&[(2, 3), (3, 2)]), Activation::Tanh, 11).unwrap();
        let x = Matrix::from_rows(&[vec![0.1, 0.4], vec![-0.5, 0.9]]).unwrap();
        let y = [0, 1];
        let plain = grad_loss(&m, &x, &y, None).unwrap();
        let zero = vec![0.0; m.params().len()];
        let with = grad_loss(&m, &x, &y, Some(&zero)).unwrap();
        assert_eq!(plain, with);
    }

    #[test]
    fn generic_over_f32() {
        let m = Mlp::<f32>::init(&shapes(&[(2, 4), (4, 2)]), Activation::Relu, 1).unwrap();
        let x = Matrix::from_rows(&[vec![0.5f32, -0.5]]).unwrap();
        let p = m.forward(&x).unwrap();
        assert!((p.as_slice().iter().sum::<f32>() - 1.0).abs() < 1e-6);
    }
}
