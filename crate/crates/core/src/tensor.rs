//! Dense N-way tensors with Little-Endian linear indexing.
//!
//! The first index varies fastest: the offset of `(i_1, ..., i_N)` (0-based)
//! is `i_1 + I_1 * (i_2 + I_2 * (i_3 + ...))`. Under this ordering a reshape
//! only replaces shape metadata, so matricization and tensorization are
//! exact inverses of each other.
//!
//! Mode numbers in the public API (`contract`, `unfold`) are 1-based.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("element count mismatch: shape {expected:?} holds {expected_count} elements, got {actual}")]
    ElementCountMismatch {
        expected: Vec<usize>,
        expected_count: usize,
        actual: usize,
    },
    #[error("mode size mismatch: {left} vs {right}")]
    ModeSizeMismatch { left: usize, right: usize },
    #[error("mode {mode} out of range for an order-{order} tensor")]
    ModeIndexOutOfRange { mode: usize, order: usize },
    #[error("zero-sized mode in shape {0:?}")]
    ZeroDimension(Vec<usize>),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Ordered mode sizes of a tensor. An empty shape is a scalar.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.contains(&0) {
            return Err(TensorError::ZeroDimension(dims));
        }
        Ok(Shape(dims))
    }

    pub fn scalar() -> Self {
        Shape(Vec::new())
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self) -> usize {
        self.0.iter().product()
    }

    /// Linear offset of a 0-based multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.0.len());
        let mut offset = 0;
        let mut stride = 1;
        for (&i, &dim) in index.iter().zip(&self.0) {
            debug_assert!(i < dim);
            offset += i * stride;
            stride *= dim;
        }
        offset
    }

    /// Inverse of [`Shape::offset`].
    pub fn unravel(&self, mut offset: usize) -> Vec<usize> {
        self.0
            .iter()
            .map(|&dim| {
                let i = offset % dim;
                offset /= dim;
                i
            })
            .collect()
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Double-precision dense tensor.
#[derive(Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: impl Into<Vec<usize>>, data: Vec<f64>) -> Result<Self> {
        let shape = Shape::new(dims)?;
        if shape.count() != data.len() {
            return Err(TensorError::ElementCountMismatch {
                expected: shape.0.clone(),
                expected_count: shape.count(),
                actual: data.len(),
            });
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let shape = Shape::new(dims)?;
        let data = vec![0.0; shape.count()];
        Ok(DenseTensor { shape, data })
    }

    pub fn from_fn(dims: impl Into<Vec<usize>>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let shape = Shape::new(dims)?;
        let data = (0..shape.count()).map(|k| f(&shape.unravel(k))).collect();
        Ok(DenseTensor { shape, data })
    }

    pub fn scalar(value: f64) -> Self {
        DenseTensor {
            shape: Shape::scalar(),
            data: vec![value],
        }
    }

    /// Order-1 tensor. Panics on an empty buffer.
    pub fn vector(data: Vec<f64>) -> Self {
        assert!(!data.is_empty(), "vector must have at least one entry");
        DenseTensor {
            shape: Shape(vec![data.len()]),
            data,
        }
    }

    /// Column-major `rows x cols` matrix.
    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(vec![n, n], |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.shape.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let k = self.shape.offset(index);
        self.data[k] = value;
    }

    /// Replaces the shape, keeping the data buffer untouched.
    pub fn reshape(&self, dims: impl Into<Vec<usize>>) -> Result<Self> {
        self.clone().into_reshaped(dims)
    }

    pub fn into_reshaped(self, dims: impl Into<Vec<usize>>) -> Result<Self> {
        DenseTensor::new(dims, self.data)
    }

    /// Reorders modes: mode `k` of the result is mode `perm[k]` (0-based) of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let order = self.order();
        let mut seen = vec![false; order];
        if perm.len() != order || perm.iter().any(|&p| p >= order || std::mem::replace(&mut seen[p], true)) {
            return Err(TensorError::InvalidPermutation(perm.to_vec()));
        }
        let src_dims = self.dims();
        let dims: Vec<usize> = perm.iter().map(|&p| src_dims[p]).collect();
        let mut src_strides = vec![1; order];
        for k in 1..order {
            src_strides[k] = src_strides[k - 1] * src_dims[k - 1];
        }
        let strides: Vec<usize> = perm.iter().map(|&p| src_strides[p]).collect();
        let mut data = Vec::with_capacity(self.len());
        let mut index = vec![0usize; order];
        for _ in 0..self.len() {
            let src: usize = index.iter().zip(&strides).map(|(i, s)| i * s).sum();
            data.push(self.data[src]);
            for k in 0..order {
                index[k] += 1;
                if index[k] < dims[k] {
                    break;
                }
                index[k] = 0;
            }
        }
        DenseTensor::new(dims, data)
    }

    /// Mode-`mode` unfolding (1-based): an `I_mode x (prod of other modes)` matrix
    /// whose columns enumerate the remaining modes in Little-Endian order.
    pub fn unfold(&self, mode: usize) -> Result<Self> {
        let order = self.order();
        if mode == 0 || mode > order {
            return Err(TensorError::ModeIndexOutOfRange { mode, order });
        }
        let mut perm = vec![mode - 1];
        perm.extend((0..order).filter(|&k| k != mode - 1));
        let rows = self.dims()[mode - 1];
        let cols = self.len() / rows;
        self.permute(&perm)?.into_reshaped(vec![rows, cols])
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    fn zip_with(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch(self.dims().to_vec(), other.dims().to_vec()));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn add(&self, other: &DenseTensor) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// `self += factor * other`, shapes must agree.
    pub fn axpy(&mut self, factor: f64, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch(self.dims().to_vec(), other.dims().to_vec()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseTensor")
            .field("shape", &self.shape)
            .field("data", &self.data)
            .finish()
    }
}

/// `(m, n)` contraction: sums mode `n` of `a` against mode `m` of `b` (both
/// 1-based). The result lists the remaining modes of `a` followed by the
/// remaining modes of `b`; contracting two vectors yields an order-0 tensor.
pub fn contract(a: &DenseTensor, n: usize, b: &DenseTensor, m: usize) -> Result<DenseTensor> {
    if n == 0 || n > a.order() {
        return Err(TensorError::ModeIndexOutOfRange { mode: n, order: a.order() });
    }
    if m == 0 || m > b.order() {
        return Err(TensorError::ModeIndexOutOfRange { mode: m, order: b.order() });
    }
    let k_len = a.dims()[n - 1];
    if k_len != b.dims()[m - 1] {
        return Err(TensorError::ModeSizeMismatch {
            left: k_len,
            right: b.dims()[m - 1],
        });
    }

    let a_pre: usize = a.dims()[..n - 1].iter().product();
    let a_post: usize = a.dims()[n..].iter().product();
    let b_pre: usize = b.dims()[..m - 1].iter().product();
    let b_post: usize = b.dims()[m..].iter().product();
    let a_rest = a_pre * a_post;
    let b_rest = b_pre * b_post;

    let mut out = vec![0.0; a_rest * b_rest];
    for bq in 0..b_post {
        for bp in 0..b_pre {
            let col = bp + b_pre * bq;
            for k in 0..k_len {
                let bv = b.data[bp + b_pre * (k + k_len * bq)];
                if bv == 0.0 {
                    continue;
                }
                for aq in 0..a_post {
                    let a_base = a_pre * (k + k_len * aq);
                    let out_base = a_pre * aq + a_rest * col;
                    for ap in 0..a_pre {
                        out[out_base + ap] += a.data[a_base + ap] * bv;
                    }
                }
            }
        }
    }

    let mut dims: Vec<usize> = a.dims()[..n - 1].to_vec();
    dims.extend_from_slice(&a.dims()[n..]);
    dims.extend_from_slice(&b.dims()[..m - 1]);
    dims.extend_from_slice(&b.dims()[m..]);
    DenseTensor::new(dims, out)
}

/// Matrix product of two order-2 tensors.
pub fn matmul(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    if a.order() != 2 {
        return Err(TensorError::ModeIndexOutOfRange { mode: 2, order: a.order() });
    }
    contract(a, 2, b, 1)
}

pub fn frobenius_norm_sq(t: &DenseTensor) -> f64 {
    t.frobenius_norm_sq()
}
