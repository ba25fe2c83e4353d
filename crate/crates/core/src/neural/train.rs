//! Mini-batch SGD over windowed sequence samples.

use rand::seq::SliceRandom;

use crate::exec::{self, Execution};
use crate::interpret::{core_change, CoreChangeLog};
use crate::rng;
use crate::tensor::DenseTensor;

use super::model::{cross_entropy_loss, Gradients, TtRnn};
use super::{Label, NeuralError, Result};

/// Samples per gradient partial sum. Partial sums are combined in order, so the
/// batch gradient does not depend on the thread count.
pub const GRAD_CHUNK: usize = 8;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seq_len: usize,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-5,
            epochs: 20,
            batch_size: 66,
            seq_len: 10,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NeuralError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.seq_len == 0 {
            return Err(NeuralError::InvalidConfig(
                "epochs, batch size and sequence length must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleRef {
    /// Index of the first step of the window.
    pub start: usize,
    pub label: Label,
}

/// Sliding-window samples over a shared sequence of per-day input tensors.
#[derive(Clone, Debug, Default)]
pub struct SequenceDataset {
    steps: Vec<DenseTensor>,
    samples: Vec<SampleRef>,
    seq_len: usize,
}

impl SequenceDataset {
    pub fn new(steps: Vec<DenseTensor>, samples: Vec<SampleRef>, seq_len: usize) -> Result<Self> {
        if seq_len == 0 {
            return Err(NeuralError::EmptySequence);
        }
        if let Some(bad) = samples.iter().find(|s| s.start + seq_len > steps.len()) {
            return Err(NeuralError::InvalidConfig(format!(
                "window starting at {} runs past {} steps",
                bad.start,
                steps.len()
            )));
        }
        Ok(SequenceDataset { steps, samples, seq_len })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn samples(&self) -> &[SampleRef] {
        &self.samples
    }

    pub fn sample(&self, k: usize) -> (&[DenseTensor], Label) {
        let s = self.samples[k];
        (&self.steps[s.start..s.start + self.seq_len], s.label)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Dataset restricted to the given sample indices (steps are shared by clone).
    pub fn subset(&self, indices: &[usize]) -> SequenceDataset {
        SequenceDataset {
            steps: self.steps.clone(),
            samples: indices.iter().map(|&k| self.samples[k]).collect(),
            seq_len: self.seq_len,
        }
    }

    /// Class probabilities for every sample.
    pub fn predict(&self, model: &TtRnn, execution: Execution) -> Result<Vec<[f64; 3]>> {
        exec::map_range(execution, self.len(), |k| model.predict(self.sample(k).0))
            .into_iter()
            .collect()
    }

    /// Mean cross-entropy over all samples.
    pub fn mean_loss(&self, model: &TtRnn, execution: Execution) -> Result<f64> {
        if self.is_empty() {
            return Err(NeuralError::EmptyDataset);
        }
        let probs = self.predict(model, execution)?;
        let total: f64 = probs
            .iter()
            .zip(&self.samples)
            .map(|(p, s)| cross_entropy_loss(p, s.label))
            .sum();
        Ok(total / self.len() as f64)
    }
}

/// Mean loss and mean gradient over the samples at `indices`.
pub fn batch_gradients(
    model: &TtRnn,
    data: &SequenceDataset,
    indices: &[usize],
    execution: Execution,
) -> Result<(f64, Gradients)> {
    if indices.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let chunks: Vec<&[usize]> = indices.chunks(GRAD_CHUNK).collect();
    let partials = exec::map(execution, &chunks, |chunk| -> Result<(f64, Gradients)> {
        let mut loss = 0.0;
        let mut grads = Gradients::zeros_like(model);
        for &k in *chunk {
            let (xs, label) = data.sample(k);
            let (probs, cache) = model.forward_sequence(xs)?;
            loss += cross_entropy_loss(&probs, label);
            grads.accumulate(1.0, &model.backward(&cache, label)?)?;
        }
        Ok((loss, grads))
    });
    let mut loss = 0.0;
    let mut grads = Gradients::zeros_like(model);
    for part in partials {
        let (l, g) = part?;
        loss += l;
        grads.accumulate(1.0, &g)?;
    }
    let inv = 1.0 / indices.len() as f64;
    grads.scale(inv);
    Ok((loss * inv, grads))
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: TtRnn,
    /// TT cores after each epoch, `snapshots[e][n]`.
    pub snapshots: Vec<Vec<DenseTensor>>,
    /// Full training-set loss after each epoch.
    pub epoch_losses: Vec<f64>,
    pub change_log: CoreChangeLog,
}

/// Runs `epochs` passes of shuffled mini-batch SGD starting from `model`.
pub fn train(model: TtRnn, data: &SequenceDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(NeuralError::EmptyDataset);
    }
    let mut model = model;
    let mut shuffle = rng::stream(config.seed, "shuffle");
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut snapshots = Vec::with_capacity(config.epochs);
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut shuffle);
        for batch in order.chunks(config.batch_size) {
            let (_, grads) = batch_gradients(&model, data, batch, config.execution)?;
            model.sgd_step(&grads, config.learning_rate)?;
        }
        snapshots.push(model.cores().to_vec());
        epoch_losses.push(data.mean_loss(&model, config.execution)?);
    }
    let change_log = if snapshots.len() >= 2 {
        core_change(&snapshots).expect("core shapes are fixed during training")
    } else {
        CoreChangeLog::empty(model.cores())
    };
    Ok(TrainOutcome {
        model,
        snapshots,
        epoch_losses,
        change_log,
    })
}
