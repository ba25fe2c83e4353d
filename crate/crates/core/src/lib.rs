//! Tensor-Train recurrent networks for forecasting from multi-way market data.
//!
//! The crate is layered bottom-up: dense tensors and contraction
//! ([`tensor`]), Tensor-Train vectors and matrices ([`tt`]), the TT-RNN model
//! and its trainer ([`neural`]), feature engineering over an asset panel
//! ([`features`]), evaluation ([`backtest`]) and core-change analysis
//! ([`interpret`]). [`pipeline`] ties them together for the command line.

pub mod backtest;
pub mod exec;
pub mod features;
pub mod interpret;
pub mod neural;
pub mod pipeline;
pub mod rng;
pub mod tensor;
pub mod textio;
pub mod tt;

pub use exec::Execution;
pub use tensor::{contract, DenseTensor, Shape, TensorError};
pub use tt::{tt_svd, Truncation, TtMatrix, TtVector};
