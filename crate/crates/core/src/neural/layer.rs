//! TT fully-connected layer: `Y = W X + B` with `W` held as a TT-matrix.
//!
//! The input is pushed through the cores one at a time and the dense
//! `M x P` matrix is never formed. Before step `n` the running state is a
//! 4-index array `T(a, r, i, b)` of shape `(J_1..J_{n-1}, R_{n-1}, I_n,
//! I_{n+1}..I_N)`, where `a` and `b` are Little-Endian group indices.
//! Step `n` sums over `(r, i)` against `G_n(r, i, j, r')` and regroups
//! `(a, j) -> a'`, `(i_{n+1}, rest) <- b`. After the last step the state is
//! the output tensor in `(J_1, ..., J_N)` Little-Endian order.

use crate::tensor::DenseTensor;
use crate::tt::TtMatrix;

use super::{NeuralError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TtLinearLayer {
    pub(crate) weights: TtMatrix,
    pub(crate) bias: DenseTensor,
}

/// Intermediate chain states `T_0 .. T_{N-1}`, kept for the backward pass.
#[derive(Clone, Debug, Default)]
pub struct ChainTrace {
    pub(crate) states: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug)]
struct StepDims {
    jpre: usize,
    r0: usize,
    i: usize,
    j: usize,
    r1: usize,
    ipost: usize,
}

impl TtLinearLayer {
    pub fn new(weights: TtMatrix, bias: DenseTensor) -> Result<Self> {
        let out_dims = weights.out_dims();
        if bias.dims() != out_dims.as_slice() {
            return Err(NeuralError::ShapeMismatch {
                what: "bias",
                expected: out_dims,
                actual: bias.dims().to_vec(),
            });
        }
        Ok(TtLinearLayer { weights, bias })
    }

    pub fn weights(&self) -> &TtMatrix {
        &self.weights
    }

    pub fn bias(&self) -> &DenseTensor {
        &self.bias
    }

    pub fn in_dims(&self) -> Vec<usize> {
        self.weights.in_dims()
    }

    pub fn out_dims(&self) -> Vec<usize> {
        self.weights.out_dims()
    }

    fn step_dims(&self, n: usize) -> StepDims {
        let d = self.weights.cores()[n].dims();
        let out = self.weights.out_dims();
        let inp = self.weights.in_dims();
        StepDims {
            jpre: out[..n].iter().product(),
            r0: d[0],
            i: d[1],
            j: d[2],
            r1: d[3],
            ipost: inp[n + 1..].iter().product(),
        }
    }

    pub(crate) fn check_input(&self, x: &DenseTensor) -> Result<()> {
        let in_dims = self.in_dims();
        // accept either the tensorized input or its flat vectorization
        if x.dims() == in_dims.as_slice() || (x.order() == 1 && x.len() == self.weights.in_size()) {
            Ok(())
        } else {
            Err(NeuralError::ShapeMismatch {
                what: "input",
                expected: in_dims,
                actual: x.dims().to_vec(),
            })
        }
    }

    /// `W x` (no bias) through the contraction chain, optionally recording states.
    pub(crate) fn apply_weights(&self, x: &[f64], mut trace: Option<&mut ChainTrace>) -> Vec<f64> {
        let mut state = x.to_vec();
        for (n, core) in self.weights.cores().iter().enumerate() {
            let next = chain_step(&state, self.step_dims(n), core.data());
            let prev = std::mem::replace(&mut state, next);
            if let Some(t) = trace.as_deref_mut() {
                t.states.push(prev);
            }
        }
        state
    }

    /// Accumulates core gradients for output gradient `dy`, given the forward trace.
    pub(crate) fn backprop_weights(&self, trace: &ChainTrace, dy: &[f64], dcores: &mut [DenseTensor]) {
        let n_modes = self.weights.num_modes();
        let mut grad = dy.to_vec();
        for n in (0..n_modes).rev() {
            let need_input_grad = n > 0;
            let dprev = chain_step_backward(
                &trace.states[n],
                &grad,
                self.step_dims(n),
                self.weights.cores()[n].data(),
                dcores[n].data_mut(),
                need_input_grad,
            );
            grad = dprev;
        }
    }

    pub fn forward(&self, x: &DenseTensor) -> Result<DenseTensor> {
        self.check_input(x)?;
        let mut y = self.apply_weights(x.data(), None);
        for (v, b) in y.iter_mut().zip(self.bias.data()) {
            *v += b;
        }
        Ok(DenseTensor::new(self.out_dims(), y)?)
    }

    pub fn param_count(&self) -> usize {
        self.weights.param_count()
    }
}

fn chain_step(prev: &[f64], d: StepDims, core: &[f64]) -> Vec<f64> {
    let StepDims { jpre, r0, i: ni, j: nj, r1, ipost } = d;
    debug_assert_eq!(prev.len(), jpre * r0 * ni * ipost);
    let mut next = vec![0.0; jpre * nj * r1 * ipost];
    for b in 0..ipost {
        for rr in 0..r1 {
            for j in 0..nj {
                let out = &mut next[jpre * (j + nj * (rr + r1 * b))..][..jpre];
                for i in 0..ni {
                    for r in 0..r0 {
                        let g = core[r + r0 * (i + ni * (j + nj * rr))];
                        let src = &prev[jpre * (r + r0 * (i + ni * b))..][..jpre];
                        for (o, s) in out.iter_mut().zip(src) {
                            *o += s * g;
                        }
                    }
                }
            }
        }
    }
    next
}

fn chain_step_backward(
    prev: &[f64],
    dnext: &[f64],
    d: StepDims,
    core: &[f64],
    dcore: &mut [f64],
    need_input_grad: bool,
) -> Vec<f64> {
    let StepDims { jpre, r0, i: ni, j: nj, r1, ipost } = d;
    let mut dprev = if need_input_grad { vec![0.0; prev.len()] } else { Vec::new() };
    for b in 0..ipost {
        for rr in 0..r1 {
            for j in 0..nj {
                let dout = &dnext[jpre * (j + nj * (rr + r1 * b))..][..jpre];
                for i in 0..ni {
                    for r in 0..r0 {
                        let k = r + r0 * (i + ni * (j + nj * rr));
                        let base = jpre * (r + r0 * (i + ni * b));
                        let src = &prev[base..][..jpre];
                        dcore[k] += src.iter().zip(dout).map(|(s, g)| s * g).sum::<f64>();
                        if need_input_grad {
                            let g = core[k];
                            for (dp, go) in dprev[base..][..jpre].iter_mut().zip(dout) {
                                *dp += g * go;
                            }
                        }
                    }
                }
            }
        }
    }
    dprev
}

pub fn tt_linear_forward(layer: &TtLinearLayer, x: &DenseTensor) -> Result<DenseTensor> {
    layer.forward(x)
}
