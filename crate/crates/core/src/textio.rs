//! Plain-text tensor and TT serialization.
//!
//! ```text
//! tensor <name> <d1,d2,...>
//! <values, whitespace separated, Little-Endian order>
//! tt-vector dims=<K_1,...> ranks=<R_0,...,R_N>
//! <core 1 values>
//! ...
//! tt-matrix in=<I_1,...> out=<J_1,...> ranks=<R_0,...,R_N>
//! <core 1 values>
//! ...
//! ```
//!
//! Values are written in shortest round-trip scientific notation, so a
//! write/read cycle is bit-exact and output is byte-stable. Blank lines and
//! lines starting with `#` are ignored.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::tensor::{DenseTensor, TensorError};
use crate::tt::{TtError, TtMatrix, TtVector};

#[derive(Debug, Error)]
pub enum TextError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("unexpected end of input: {0}")]
    Eof(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Tt(#[from] TtError),
}

pub(crate) fn join_dims(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub(crate) fn parse_dims(s: &str) -> Option<Vec<usize>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|d| d.trim().parse().ok()).collect()
}

fn write_values<W: Write>(out: &mut W, data: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in data {
        if !first {
            out.write_all(b" ")?;
        }
        write!(out, "{v:e}")?;
        first = false;
    }
    out.write_all(b"\n")
}

pub fn write_tensor<W: Write>(out: &mut W, name: &str, t: &DenseTensor) -> std::io::Result<()> {
    writeln!(out, "tensor {name} {}", join_dims(t.dims()))?;
    write_values(out, t.data())
}

pub fn write_tt_vector<W: Write>(out: &mut W, v: &TtVector) -> std::io::Result<()> {
    writeln!(out, "tt-vector dims={} ranks={}", join_dims(&v.dims()), join_dims(v.ranks()))?;
    for core in v.cores() {
        write_values(out, core.data())?;
    }
    Ok(())
}

pub fn write_tt_matrix<W: Write>(out: &mut W, w: &TtMatrix) -> std::io::Result<()> {
    writeln!(
        out,
        "tt-matrix in={} out={} ranks={}",
        join_dims(&w.in_dims()),
        join_dims(&w.out_dims()),
        join_dims(w.ranks())
    )?;
    for core in w.cores() {
        write_values(out, core.data())?;
    }
    Ok(())
}

/// Line reader that skips blanks and comments and tracks line numbers.
pub struct TextReader<R> {
    inner: R,
    line: usize,
}

impl<R: BufRead> TextReader<R> {
    pub fn new(inner: R) -> Self {
        TextReader { inner, line: 0 }
    }

    pub fn line_number(&self) -> usize {
        self.line
    }

    pub fn syntax(&self, reason: impl Into<String>) -> TextError {
        TextError::Syntax {
            line: self.line,
            reason: reason.into(),
        }
    }

    pub fn next_line(&mut self) -> Result<Option<String>, TextError> {
        loop {
            let mut buf = String::new();
            if self.inner.read_line(&mut buf)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            let t = buf.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok(Some(t.to_string()));
            }
        }
    }

    pub fn expect_line(&mut self, what: &str) -> Result<String, TextError> {
        self.next_line()?.ok_or_else(|| TextError::Eof(what.to_string()))
    }

    fn values(&mut self, count: usize, what: &str) -> Result<Vec<f64>, TextError> {
        let line = self.expect_line(what)?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| self.syntax(format!("bad number {s:?}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != count {
            return Err(self.syntax(format!("{what}: expected {count} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    pub fn read_tensor(&mut self) -> Result<(String, DenseTensor), TextError> {
        let header = self.expect_line("tensor header")?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() < 2 || parts.len() > 3 || parts[0] != "tensor" {
            return Err(self.syntax(format!("expected `tensor <name> <dims>`, got {header:?}")));
        }
        let dims = parse_dims(parts.get(2).copied().unwrap_or(""))
            .ok_or_else(|| self.syntax(format!("bad dims in {header:?}")))?;
        let count = dims.iter().product();
        let data = self.values(count, parts[1])?;
        let t = if dims.is_empty() {
            DenseTensor::scalar(data[0])
        } else {
            DenseTensor::new(dims, data)?
        };
        Ok((parts[1].to_string(), t))
    }

    fn keyed_dims(&self, header: &str, key: &str) -> Result<Vec<usize>, TextError> {
        header
            .split_whitespace()
            .find_map(|p| p.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .and_then(parse_dims)
            .ok_or_else(|| self.syntax(format!("missing or bad `{key}=` in {header:?}")))
    }

    pub fn read_tt_vector(&mut self) -> Result<TtVector, TextError> {
        let header = self.expect_line("tt-vector header")?;
        if !header.starts_with("tt-vector") {
            return Err(self.syntax(format!("expected tt-vector header, got {header:?}")));
        }
        let dims = self.keyed_dims(&header, "dims")?;
        let ranks = self.keyed_dims(&header, "ranks")?;
        if ranks.len() != dims.len() + 1 {
            return Err(self.syntax("ranks must have one more entry than dims"));
        }
        let mut cores = Vec::with_capacity(dims.len());
        for n in 0..dims.len() {
            let shape = vec![ranks[n], dims[n], ranks[n + 1]];
            let data = self.values(shape.iter().product(), "tt core")?;
            cores.push(DenseTensor::new(shape, data)?);
        }
        Ok(TtVector::new(cores)?)
    }

    pub fn read_tt_matrix(&mut self) -> Result<TtMatrix, TextError> {
        let header = self.expect_line("tt-matrix header")?;
        if !header.starts_with("tt-matrix") {
            return Err(self.syntax(format!("expected tt-matrix header, got {header:?}")));
        }
        let in_dims = self.keyed_dims(&header, "in")?;
        let out_dims = self.keyed_dims(&header, "out")?;
        let ranks = self.keyed_dims(&header, "ranks")?;
        if in_dims.len() != out_dims.len() || ranks.len() != in_dims.len() + 1 {
            return Err(self.syntax("inconsistent tt-matrix header lengths"));
        }
        let mut cores = Vec::with_capacity(in_dims.len());
        for n in 0..in_dims.len() {
            let shape = vec![ranks[n], in_dims[n], out_dims[n], ranks[n + 1]];
            let data = self.values(shape.iter().product(), "tt core")?;
            cores.push(DenseTensor::new(shape, data)?);
        }
        Ok(TtMatrix::new(cores)?)
    }
}
