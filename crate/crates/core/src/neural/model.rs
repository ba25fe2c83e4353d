//! TT-RNN: `h_t = tanh(W_hh h_{t-1} + W_xh x_t + b)` with `W_xh` in TT form,
//! followed by a dense 3-way softmax head on the last hidden state.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::tensor::DenseTensor;
use crate::tt::TtMatrix;

use super::layer::{ChainTrace, TtLinearLayer};
use super::{Label, NeuralError, Result, NUM_CLASSES};

/// Mode sizes and TT-ranks of the input-to-hidden map.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelShape {
    pub in_dims: Vec<usize>,
    pub hidden_dims: Vec<usize>,
    /// Full rank tuple `(R_0, ..., R_N)` with `R_0 = R_N = 1`.
    pub ranks: Vec<usize>,
}

impl ModelShape {
    /// Shape with every inner rank set to `rank`.
    pub fn uniform(in_dims: Vec<usize>, hidden_dims: Vec<usize>, rank: usize) -> Self {
        let n = in_dims.len();
        let ranks = (0..=n).map(|k| if k == 0 || k == n { 1 } else { rank }).collect();
        ModelShape {
            in_dims,
            hidden_dims,
            ranks,
        }
    }

    /// Configuration of the 1024-unit model: inputs 2x2x5x6x4, hidden 4^5, ranks 6.
    pub fn default_forecaster() -> Self {
        Self::uniform(vec![2, 2, 5, 6, 4], vec![4, 4, 4, 4, 4], 6)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.in_dims.len();
        let bad = |msg: String| Err(NeuralError::InvalidConfig(msg));
        if n == 0 {
            return bad("at least one mode is required".into());
        }
        if self.hidden_dims.len() != n {
            return bad(format!("{} input modes but {} hidden modes", n, self.hidden_dims.len()));
        }
        if self.ranks.len() != n + 1 {
            return bad(format!("expected {} ranks, got {}", n + 1, self.ranks.len()));
        }
        if self.ranks[0] != 1 || self.ranks[n] != 1 {
            return bad(format!("boundary ranks must be 1: {:?}", self.ranks));
        }
        if self.in_dims.iter().chain(&self.hidden_dims).chain(&self.ranks).any(|&d| d == 0) {
            return bad("dimensions and ranks must be positive".into());
        }
        Ok(())
    }

    pub fn input_size(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_dims.iter().product()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TtRnn {
    pub(crate) input: TtLinearLayer,
    /// `M x M`, column-major.
    pub(crate) feedback: DenseTensor,
    /// `3 x M`, column-major.
    pub(crate) head_weights: DenseTensor,
    pub(crate) head_bias: DenseTensor,
}

/// Per-parameter gradients, laid out exactly like the model's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub cores: Vec<DenseTensor>,
    pub bias: DenseTensor,
    pub feedback: DenseTensor,
    pub head_weights: DenseTensor,
    pub head_bias: DenseTensor,
}

impl Gradients {
    pub fn zeros_like(model: &TtRnn) -> Self {
        let z = |t: &DenseTensor| DenseTensor::zeros(t.dims().to_vec()).expect("valid shape");
        Gradients {
            cores: model.input.weights.cores().iter().map(z).collect(),
            bias: z(&model.input.bias),
            feedback: z(&model.feedback),
            head_weights: z(&model.head_weights),
            head_bias: z(&model.head_bias),
        }
    }

    pub fn tensors(&self) -> impl Iterator<Item = &DenseTensor> {
        self.cores
            .iter()
            .chain([&self.bias, &self.feedback, &self.head_weights, &self.head_bias])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut DenseTensor> {
        self.cores.iter_mut().chain([
            &mut self.bias,
            &mut self.feedback,
            &mut self.head_weights,
            &mut self.head_bias,
        ])
    }

    /// `self += factor * other`.
    pub fn accumulate(&mut self, factor: f64, other: &Gradients) -> Result<()> {
        for (a, b) in self.tensors_mut().zip(other.tensors()) {
            a.axpy(factor, b)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }
}

/// Forward activations of one sequence.
#[derive(Clone, Debug)]
pub struct SequenceCache {
    pub(crate) traces: Vec<ChainTrace>,
    /// `h_0 .. h_T`, with `h_0 = 0`.
    pub(crate) hidden: Vec<Vec<f64>>,
    pub(crate) probs: [f64; NUM_CLASSES],
}

impl SequenceCache {
    pub fn probs(&self) -> [f64; NUM_CLASSES] {
        self.probs
    }

    pub fn hidden_states(&self) -> &[Vec<f64>] {
        &self.hidden
    }
}

fn gaussian(dims: Vec<usize>, std: f64, rng: &mut impl Rng) -> DenseTensor {
    let normal = Normal::new(0.0, std).expect("finite std");
    let n = dims.iter().product();
    DenseTensor::new(dims, (0..n).map(|_| normal.sample(rng)).collect()).expect("valid shape")
}

impl TtRnn {
    pub fn new(
        input: TtLinearLayer,
        feedback: DenseTensor,
        head_weights: DenseTensor,
        head_bias: DenseTensor,
    ) -> Result<Self> {
        let m: usize = input.out_dims().iter().product();
        let check = |what: &'static str, t: &DenseTensor, expected: Vec<usize>| {
            if t.dims() == expected.as_slice() {
                Ok(())
            } else {
                Err(NeuralError::ShapeMismatch {
                    what,
                    expected,
                    actual: t.dims().to_vec(),
                })
            }
        };
        check("feedback", &feedback, vec![m, m])?;
        check("head weights", &head_weights, vec![NUM_CLASSES, m])?;
        check("head bias", &head_bias, vec![NUM_CLASSES])?;
        Ok(TtRnn {
            input,
            feedback,
            head_weights,
            head_bias,
        })
    }

    /// All-zero parameters; the head then outputs the uniform distribution.
    pub fn zeros(shape: &ModelShape) -> Result<Self> {
        shape.validate()?;
        let m = shape.hidden_size();
        let weights = TtMatrix::zeros(&shape.in_dims, &shape.hidden_dims, &shape.ranks)?;
        let input = TtLinearLayer::new(weights, DenseTensor::zeros(shape.hidden_dims.clone())?)?;
        TtRnn::new(
            input,
            DenseTensor::zeros(vec![m, m])?,
            DenseTensor::zeros(vec![NUM_CLASSES, m])?,
            DenseTensor::zeros(vec![NUM_CLASSES])?,
        )
    }

    pub fn shape(&self) -> ModelShape {
        ModelShape {
            in_dims: self.input.in_dims(),
            hidden_dims: self.input.out_dims(),
            ranks: self.input.weights.ranks().to_vec(),
        }
    }

    pub fn input_layer(&self) -> &TtLinearLayer {
        &self.input
    }

    pub fn cores(&self) -> &[DenseTensor] {
        self.input.weights.cores()
    }

    pub fn feedback(&self) -> &DenseTensor {
        &self.feedback
    }

    pub fn head_weights(&self) -> &DenseTensor {
        &self.head_weights
    }

    pub fn head_bias(&self) -> &DenseTensor {
        &self.head_bias
    }

    pub fn hidden_size(&self) -> usize {
        self.feedback.dims()[0]
    }

    /// Parameters in the same order as [`Gradients::tensors`].
    pub fn tensors(&self) -> impl Iterator<Item = &DenseTensor> {
        self.input.weights.cores().iter().chain([
            &self.input.bias,
            &self.feedback,
            &self.head_weights,
            &self.head_bias,
        ])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut DenseTensor> {
        let TtRnn {
            input,
            feedback,
            head_weights,
            head_bias,
        } = self;
        let TtLinearLayer { weights, bias } = input;
        weights
            .cores_mut()
            .iter_mut()
            .chain([bias, feedback, head_weights, head_bias])
    }

    pub fn param_count(&self) -> usize {
        self.tensors().map(DenseTensor::len).sum()
    }

    /// Pre-activation `W_hh h_prev + W_xh x + b`.
    fn pre_activation(&self, x: &DenseTensor, h_prev: &[f64], trace: Option<&mut ChainTrace>) -> Vec<f64> {
        let m = self.hidden_size();
        let mut a = self.input.apply_weights(x.data(), trace);
        for (v, b) in a.iter_mut().zip(self.input.bias.data()) {
            *v += b;
        }
        let w = self.feedback.data();
        for (c, &h) in h_prev.iter().enumerate() {
            if h == 0.0 {
                continue;
            }
            for (v, wv) in a.iter_mut().zip(&w[m * c..m * (c + 1)]) {
                *v += wv * h;
            }
        }
        a
    }

    #[cfg(test)]
    pub(crate) fn pre_activation_for_test(&self, x: &DenseTensor, h_prev: &[f64]) -> Vec<f64> {
        self.pre_activation(x, h_prev, None)
    }

    pub fn cell_forward(&self, x: &DenseTensor, h_prev: &[f64]) -> Result<Vec<f64>> {
        self.input.check_input(x)?;
        if h_prev.len() != self.hidden_size() {
            return Err(NeuralError::ShapeMismatch {
                what: "hidden state",
                expected: vec![self.hidden_size()],
                actual: vec![h_prev.len()],
            });
        }
        let mut h = self.pre_activation(x, h_prev, None);
        h.iter_mut().for_each(|v| *v = v.tanh());
        Ok(h)
    }

    pub fn head(&self, h: &[f64]) -> [f64; NUM_CLASSES] {
        let m = self.hidden_size();
        let w = self.head_weights.data();
        let mut logits = [0.0; NUM_CLASSES];
        for (k, l) in logits.iter_mut().enumerate() {
            *l = self.head_bias.data()[k] + (0..m).map(|c| w[k + NUM_CLASSES * c] * h[c]).sum::<f64>();
        }
        softmax(logits)
    }

    pub fn forward_sequence(&self, xs: &[DenseTensor]) -> Result<([f64; NUM_CLASSES], SequenceCache)> {
        if xs.is_empty() {
            return Err(NeuralError::EmptySequence);
        }
        let m = self.hidden_size();
        let mut hidden = Vec::with_capacity(xs.len() + 1);
        hidden.push(vec![0.0; m]);
        let mut traces = Vec::with_capacity(xs.len());
        for x in xs {
            self.input.check_input(x)?;
            let mut trace = ChainTrace::default();
            let mut h = self.pre_activation(x, hidden.last().unwrap(), Some(&mut trace));
            h.iter_mut().for_each(|v| *v = v.tanh());
            hidden.push(h);
            traces.push(trace);
        }
        let probs = self.head(hidden.last().unwrap());
        Ok((probs, SequenceCache { traces, hidden, probs }))
    }

    /// Class probabilities only, without keeping activations around.
    pub fn predict(&self, xs: &[DenseTensor]) -> Result<[f64; NUM_CLASSES]> {
        if xs.is_empty() {
            return Err(NeuralError::EmptySequence);
        }
        let mut h = vec![0.0; self.hidden_size()];
        for x in xs {
            h = self.cell_forward(x, &h)?;
        }
        Ok(self.head(&h))
    }

    /// Gradient of `-log p(label)` for one sequence, by backpropagation through time.
    pub fn backward(&self, cache: &SequenceCache, label: Label) -> Result<Gradients> {
        let m = self.hidden_size();
        let steps = cache.traces.len();
        if steps == 0
            || cache.hidden.len() != steps + 1
            || cache.hidden.iter().any(|h| h.len() != m)
            || cache.traces.iter().any(|t| t.states.len() != self.input.weights.num_modes())
        {
            return Err(NeuralError::CacheMismatch);
        }
        let mut grads = Gradients::zeros_like(self);

        let mut dlogits = cache.probs;
        dlogits[label.class_index()] -= 1.0;
        let h_last = &cache.hidden[steps];
        let hw = self.head_weights.data();
        let mut dh = vec![0.0; m];
        {
            let g = grads.head_weights.data_mut();
            for c in 0..m {
                for k in 0..NUM_CLASSES {
                    g[k + NUM_CLASSES * c] += dlogits[k] * h_last[c];
                    dh[c] += hw[k + NUM_CLASSES * c] * dlogits[k];
                }
            }
        }
        for (g, d) in grads.head_bias.data_mut().iter_mut().zip(dlogits) {
            *g += d;
        }

        let w = self.feedback.data();
        for t in (1..=steps).rev() {
            let h = &cache.hidden[t];
            let h_prev = &cache.hidden[t - 1];
            let da: Vec<f64> = dh.iter().zip(h).map(|(d, hv)| d * (1.0 - hv * hv)).collect();
            for (g, d) in grads.bias.data_mut().iter_mut().zip(&da) {
                *g += d;
            }
            let gf = grads.feedback.data_mut();
            for (c, &hp) in h_prev.iter().enumerate() {
                if hp == 0.0 {
                    continue;
                }
                for (g, d) in gf[m * c..m * (c + 1)].iter_mut().zip(&da) {
                    *g += d * hp;
                }
            }
            self.input.backprop_weights(&cache.traces[t - 1], &da, &mut grads.cores);
            if t > 1 {
                for (c, out) in dh.iter_mut().enumerate() {
                    *out = w[m * c..m * (c + 1)].iter().zip(&da).map(|(wv, d)| wv * d).sum();
                }
            }
        }
        Ok(grads)
    }

    /// Plain SGD update `p <- p - lr * grad`.
    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64) -> Result<()> {
        for (p, g) in self.tensors().zip(grads.tensors()) {
            if p.dims() != g.dims() {
                return Err(NeuralError::ShapeMismatch {
                    what: "gradient",
                    expected: p.dims().to_vec(),
                    actual: g.dims().to_vec(),
                });
            }
        }
        if lr == 0.0 {
            return Ok(());
        }
        for (p, g) in self.tensors_mut().zip(grads.tensors()) {
            p.axpy(-lr, g)?;
        }
        Ok(())
    }
}

pub fn softmax(logits: [f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut e = logits.map(|l| (l - max).exp());
    let s: f64 = e.iter().sum();
    e.iter_mut().for_each(|v| *v /= s);
    e
}

pub fn cross_entropy_loss(probs: &[f64; NUM_CLASSES], label: Label) -> f64 {
    -probs[label.class_index()].ln()
}

/// Random initialization. TT cores are drawn with std `(R_{n-1} I_n)^{-1/2}`,
/// so a unit-variance input yields O(1) outputs; `W_hh` and the head use
/// `M^{-1/2}`; biases start at zero.
pub fn init_model(shape: &ModelShape, rng: &mut impl Rng) -> Result<TtRnn> {
    shape.validate()?;
    let m = shape.hidden_size();
    let n = shape.in_dims.len();
    let cores = (0..n)
        .map(|k| {
            let std = 1.0 / ((shape.ranks[k] * shape.in_dims[k]) as f64).sqrt();
            gaussian(
                vec![shape.ranks[k], shape.in_dims[k], shape.hidden_dims[k], shape.ranks[k + 1]],
                std,
                rng,
            )
        })
        .collect();
    let input = TtLinearLayer::new(TtMatrix::new(cores)?, DenseTensor::zeros(shape.hidden_dims.clone())?)?;
    let scale = 1.0 / (m as f64).sqrt();
    let feedback = gaussian(vec![m, m], scale, rng);
    let head_weights = gaussian(vec![NUM_CLASSES, m], scale, rng);
    TtRnn::new(input, feedback, head_weights, DenseTensor::zeros(vec![NUM_CLASSES])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::contract;
    use rand_distr::StandardNormal;

    fn small_shape() -> ModelShape {
        ModelShape::uniform(vec![2, 2, 2], vec![2, 2, 2], 2)
    }

    fn random_input(dims: &[usize], rng: &mut impl Rng) -> DenseTensor {
        let n = dims.iter().product();
        DenseTensor::new(dims.to_vec(), (0..n).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    #[test]
    fn zero_model_outputs_zero_state_and_uniform_probs() {
        let model = TtRnn::zeros(&small_shape()).unwrap();
        let mut rng = crate::rng::stream(1, "test");
        let x = random_input(&[2, 2, 2], &mut rng);
        let h = model.cell_forward(&x, &[0.3; 8]).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
        let (p, _) = model.forward_sequence(&[x.clone(), x]).unwrap();
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_input_gives_tanh_of_bias() {
        let mut model = TtRnn::zeros(&small_shape()).unwrap();
        let b: Vec<f64> = (0..8).map(|k| k as f64 * 0.2 - 0.7).collect();
        model.input.bias.data_mut().copy_from_slice(&b);
        let h = model.cell_forward(&DenseTensor::zeros(vec![2, 2, 2]).unwrap(), &[0.0; 8]).unwrap();
        for (hv, bv) in h.iter().zip(&b) {
            assert_eq!(*hv, bv.tanh());
        }
    }

    #[test]
    fn cell_matches_dense_rnn() {
        let mut rng = crate::rng::stream(2, "test");
        let model = init_model(&small_shape(), &mut rng).unwrap();
        let x = random_input(&[2, 2, 2], &mut rng);
        let h_prev: Vec<f64> = (0..8).map(|_| rng.random_range(-0.9..0.9)).collect();
        let wxh = model.input.weights().to_matrix().unwrap();
        let xin = contract(&wxh, 2, &x.reshape(vec![8]).unwrap(), 1).unwrap();
        let hp = DenseTensor::vector(h_prev.clone());
        let rec = contract(&model.feedback, 2, &hp, 1).unwrap();
        let h = model.cell_forward(&x, &h_prev).unwrap();
        for k in 0..8 {
            let dense = (rec.data()[k] + xin.data()[k] + model.input.bias.data()[k]).tanh();
            assert!((h[k] - dense).abs() < 1e-12);
        }
    }

    #[test]
    fn single_step_sequence_is_cell_plus_head() {
        let mut rng = crate::rng::stream(3, "test");
        let model = init_model(&small_shape(), &mut rng).unwrap();
        let x = random_input(&[2, 2, 2], &mut rng);
        let (p, _) = model.forward_sequence(std::slice::from_ref(&x)).unwrap();
        let h = model.cell_forward(&x, &[0.0; 8]).unwrap();
        let mut logits = [0.0; 3];
        for k in 0..3 {
            logits[k] = model.head_bias.get(&[k]) + (0..8).map(|c| model.head_weights.get(&[k, c]) * h[c]).sum::<f64>();
        }
        let z: f64 = logits.iter().map(|l| l.exp()).sum();
        for k in 0..3 {
            assert!((p[k] - logits[k].exp() / z).abs() < 1e-14);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sequence_and_bad_shapes() {
        let model = TtRnn::zeros(&small_shape()).unwrap();
        assert!(matches!(model.forward_sequence(&[]), Err(NeuralError::EmptySequence)));
        let bad = DenseTensor::zeros(vec![3, 3]).unwrap();
        assert!(matches!(model.forward_sequence(&[bad]), Err(NeuralError::ShapeMismatch { .. })));
        assert!(model.cell_forward(&DenseTensor::zeros(vec![2, 2, 2]).unwrap(), &[0.0; 3]).is_err());
    }

    #[test]
    fn loss_values() {
        let u = [1.0 / 3.0; 3];
        for l in [Label::Up, Label::Flat, Label::Down] {
            assert!((cross_entropy_loss(&u, l) - 3f64.ln()).abs() < 1e-15);
        }
        let eps = 1e-6;
        let p = [1.0 - eps, eps / 2.0, eps / 2.0];
        assert!((cross_entropy_loss(&p, Label::Up) - eps).abs() < 1e-11);
    }

    #[test]
    fn confident_head_has_vanishing_head_gradient() {
        let mut model = TtRnn::zeros(&small_shape()).unwrap();
        model.head_bias.data_mut().copy_from_slice(&[60.0, 0.0, 0.0]);
        let x = DenseTensor::zeros(vec![2, 2, 2]).unwrap();
        let (_, cache) = model.forward_sequence(&[x]).unwrap();
        let g = model.backward(&cache, Label::Up).unwrap();
        assert!(g.head_bias.data().iter().all(|v| v.abs() < 1e-20));
        assert!(g.head_weights.data().iter().all(|v| v.abs() < 1e-20));
    }

    #[test]
    fn cache_mismatch_detected() {
        let model = TtRnn::zeros(&small_shape()).unwrap();
        let other = TtRnn::zeros(&ModelShape::uniform(vec![2, 2, 2], vec![2, 2, 1], 2)).unwrap();
        let (_, cache) = other.forward_sequence(&[DenseTensor::zeros(vec![2, 2, 2]).unwrap()]).unwrap();
        assert!(matches!(model.backward(&cache, Label::Up), Err(NeuralError::CacheMismatch)));
    }

    #[test]
    fn sgd_zero_lr_is_identity_and_scalar_update() {
        let mut rng = crate::rng::stream(4, "test");
        let mut model = init_model(&small_shape(), &mut rng).unwrap();
        let before = model.clone();
        let mut grads = Gradients::zeros_like(&model);
        grads.head_bias.data_mut()[1] = 2.5;
        model.sgd_step(&grads, 0.0).unwrap();
        assert_eq!(model, before);
        model.sgd_step(&grads, 0.1).unwrap();
        assert_eq!(model.head_bias.data()[1], before.head_bias.data()[1] - 0.1 * 2.5);
        assert_eq!(model.feedback, before.feedback);
    }

    #[test]
    fn sgd_step_decreases_loss() {
        let mut rng = crate::rng::stream(5, "test");
        let mut model = init_model(&small_shape(), &mut rng).unwrap();
        let xs = vec![random_input(&[2, 2, 2], &mut rng), random_input(&[2, 2, 2], &mut rng)];
        let (p0, cache) = model.forward_sequence(&xs).unwrap();
        let g = model.backward(&cache, Label::Down).unwrap();
        model.sgd_step(&g, 1e-3).unwrap();
        let (p1, _) = model.forward_sequence(&xs).unwrap();
        assert!(cross_entropy_loss(&p1, Label::Down) < cross_entropy_loss(&p0, Label::Down));
    }

    #[test]
    fn init_is_deterministic_and_well_formed() {
        let shape = small_shape();
        let a = init_model(&shape, &mut crate::rng::stream(9, "init")).unwrap();
        let b = init_model(&shape, &mut crate::rng::stream(9, "init")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shape(), shape);
        assert_eq!(a.hidden_size(), 8);
        assert!(a.input.bias.data().iter().all(|&v| v == 0.0));
        assert!(a.head_bias.data().iter().all(|&v| v == 0.0));
        assert!(init_model(&ModelShape::uniform(vec![2], vec![2, 2], 1), &mut crate::rng::stream(0, "x")).is_err());
    }

    #[test]
    fn init_preactivation_scale_band() {
        // Monte-Carlo over seeds at the full 480 -> 1024 configuration
        let shape = ModelShape::default_forecaster();
        let mut stds = Vec::new();
        for seed in 0..100 {
            let mut rng = crate::rng::stream(seed, "init");
            let model = init_model(&shape, &mut rng).unwrap();
            let x = random_input(&shape.in_dims, &mut rng);
            let a = model.pre_activation_for_test(&x, &vec![0.0; 1024]);
            let mean = a.iter().sum::<f64>() / a.len() as f64;
            let var = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / a.len() as f64;
            stds.push(var.sqrt());
        }
        let avg = stds.iter().sum::<f64>() / stds.len() as f64;
        assert!((0.1..=10.0).contains(&avg), "{avg}");
        assert!(stds.iter().all(|s| (0.1..=10.0).contains(s)));
    }
}
