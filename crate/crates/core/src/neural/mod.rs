//! TT fully-connected layer, TT-RNN cell, softmax head, cross-entropy,
//! hand-derived backpropagation through time and plain SGD training.

mod layer;
mod model;
mod train;

use thiserror::Error;

use crate::tensor::TensorError;
use crate::tt::TtError;

pub use layer::{tt_linear_forward, TtLinearLayer};
pub use model::{cross_entropy_loss, init_model, softmax, Gradients, ModelShape, SequenceCache, TtRnn};
pub use train::{batch_gradients, train, SampleRef, SequenceDataset, TrainConfig, TrainOutcome, GRAD_CHUNK};

pub const NUM_CLASSES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("{what} shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        what: &'static str,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("empty input sequence")]
    EmptySequence,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("forward cache does not belong to this model")]
    CacheMismatch,
    #[error("invalid label {0}; expected +1, 0 or -1")]
    InvalidLabel(i64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Tt(#[from] TtError),
}

pub type Result<T> = std::result::Result<T, NeuralError>;

/// Next-day direction of the target series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Up,
    Flat,
    Down,
}

impl Label {
    /// Fixed output slot: `+1 -> 0`, `0 -> 1`, `-1 -> 2`.
    pub fn class_index(self) -> usize {
        match self {
            Label::Up => 0,
            Label::Flat => 1,
            Label::Down => 2,
        }
    }

    pub fn from_class_index(k: usize) -> Option<Label> {
        match k {
            0 => Some(Label::Up),
            1 => Some(Label::Flat),
            2 => Some(Label::Down),
            _ => None,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Label::Up => 1,
            Label::Flat => 0,
            Label::Down => -1,
        }
    }

    /// Most probable class; ties go to the lower slot.
    pub fn argmax(probs: &[f64; NUM_CLASSES]) -> Label {
        let mut best = 0;
        for k in 1..NUM_CLASSES {
            if probs[k] > probs[best] {
                best = k;
            }
        }
        Label::from_class_index(best).unwrap()
    }
}

impl TryFrom<i64> for Label {
    type Error = NeuralError;

    fn try_from(v: i64) -> Result<Label> {
        match v {
            1 => Ok(Label::Up),
            0 => Ok(Label::Flat),
            -1 => Ok(Label::Down),
            other => Err(NeuralError::InvalidLabel(other)),
        }
    }
}

pub fn ttrnn_cell_forward(model: &TtRnn, x: &crate::tensor::DenseTensor, h_prev: &[f64]) -> Result<Vec<f64>> {
    model.cell_forward(x, h_prev)
}

pub fn forward_sequence(
    model: &TtRnn,
    xs: &[crate::tensor::DenseTensor],
) -> Result<([f64; NUM_CLASSES], SequenceCache)> {
    model.forward_sequence(xs)
}

pub fn backward(model: &TtRnn, cache: &SequenceCache, label: Label) -> Result<Gradients> {
    model.backward(cache, label)
}

pub fn sgd_step(model: &mut TtRnn, grads: &Gradients, lr: f64) -> Result<()> {
    model.sgd_step(grads, lr)
}
