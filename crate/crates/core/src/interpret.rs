//! Normalized TT-core change across training epochs and the modal ranking
//! derived from it.
//!
//! For core `n` and epoch `e >= 2` the change is
//! `||G_n^e - G_n^{e-1}||_F^2 / (I_n J_n R_{n-1} R_n)`, i.e. the mean squared
//! per-entry movement of the core over that epoch.

use std::io::{BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::tensor::DenseTensor;

#[derive(Debug, Error)]
pub enum InterpretError {
    #[error("core {core} changed shape from {from:?} to {to:?} at epoch {epoch}")]
    ShapeDrift {
        core: usize,
        epoch: usize,
        from: Vec<usize>,
        to: Vec<usize>,
    },
    #[error("at least two epoch snapshots are required, got {0}")]
    TooFewSnapshots(usize),
    #[error("malformed core-change record: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoreChangeLog {
    /// Shape of each core, `(R_{n-1}, I_n, J_n, R_n)` for TT-matrix cores.
    core_dims: Vec<Vec<usize>>,
    /// `values[n][k]` is the change of core `n + 1` at epoch `k + 2`.
    values: Vec<Vec<f64>>,
}

impl CoreChangeLog {
    pub fn empty(cores: &[DenseTensor]) -> Self {
        CoreChangeLog {
            core_dims: cores.iter().map(|c| c.dims().to_vec()).collect(),
            values: vec![Vec::new(); cores.len()],
        }
    }

    pub fn from_values(core_dims: Vec<Vec<usize>>, values: Vec<Vec<f64>>) -> Self {
        assert_eq!(core_dims.len(), values.len());
        CoreChangeLog { core_dims, values }
    }

    pub fn num_cores(&self) -> usize {
        self.values.len()
    }

    pub fn core_dims(&self) -> &[Vec<usize>] {
        &self.core_dims
    }

    /// Per core, changes for epochs `2..=E`.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Change of core `core` (1-based) at epoch `epoch` (>= 2).
    pub fn get(&self, core: usize, epoch: usize) -> f64 {
        self.values[core - 1][epoch - 2]
    }

    pub fn entry_count(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    pub fn aggregate(&self, core: usize) -> f64 {
        self.values[core - 1].iter().sum()
    }

    /// CSV with header `core,epoch,normalized_change`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), InterpretError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["core", "epoch", "normalized_change"])?;
        for (n, vals) in self.values.iter().enumerate() {
            for (k, v) in vals.iter().enumerate() {
                w.write_record([(n + 1).to_string(), (k + 2).to_string(), format!("{v:e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`CoreChangeLog::write_csv`]. Core shapes are not
    /// part of the CSV and come back empty.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, InterpretError> {
        let mut r = csv::Reader::from_reader(input);
        let mut values: Vec<Vec<f64>> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |k: usize| rec.get(k).map(str::trim).unwrap_or("").to_string();
            let core: usize = parse(0).parse().map_err(|_| InterpretError::Parse(format!("{rec:?}")))?;
            let epoch: usize = parse(1).parse().map_err(|_| InterpretError::Parse(format!("{rec:?}")))?;
            let v: f64 = parse(2).parse().map_err(|_| InterpretError::Parse(format!("{rec:?}")))?;
            if core == 0 || epoch < 2 {
                return Err(InterpretError::Parse(format!("core {core}, epoch {epoch}")));
            }
            if values.len() < core {
                values.resize(core, Vec::new());
            }
            let slot = &mut values[core - 1];
            if slot.len() != epoch - 2 {
                return Err(InterpretError::Parse(format!("epochs out of order for core {core}")));
            }
            slot.push(v);
        }
        Ok(CoreChangeLog {
            core_dims: vec![Vec::new(); values.len()],
            values,
        })
    }
}

/// Computes the per-epoch normalized change of every core from epoch-boundary
/// snapshots (`snapshots[e][n]` is core `n` after epoch `e`).
pub fn core_change(snapshots: &[Vec<DenseTensor>]) -> Result<CoreChangeLog, InterpretError> {
    if snapshots.len() < 2 {
        return Err(InterpretError::TooFewSnapshots(snapshots.len()));
    }
    let first = &snapshots[0];
    let mut values = vec![Vec::with_capacity(snapshots.len() - 1); first.len()];
    for (e, pair) in snapshots.windows(2).enumerate() {
        let (prev, cur) = (&pair[0], &pair[1]);
        if cur.len() != first.len() {
            return Err(InterpretError::ShapeDrift {
                core: cur.len().min(first.len()) + 1,
                epoch: e + 2,
                from: Vec::new(),
                to: Vec::new(),
            });
        }
        for (n, (a, b)) in prev.iter().zip(cur).enumerate() {
            if a.dims() != b.dims() {
                return Err(InterpretError::ShapeDrift {
                    core: n + 1,
                    epoch: e + 2,
                    from: a.dims().to_vec(),
                    to: b.dims().to_vec(),
                });
            }
            let sq: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (y - x) * (y - x)).sum();
            values[n].push(sq / a.len() as f64);
        }
    }
    Ok(CoreChangeLog {
        core_dims: first.iter().map(|c| c.dims().to_vec()).collect(),
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedCore {
    /// 1-based core index.
    pub core: usize,
    pub aggregate_change: f64,
    pub mode: String,
}

/// What each core's input mode represents in the 2x2x5x6x4 layout.
pub fn mode_label(core: usize, num_cores: usize) -> String {
    if num_cores == 5 {
        match core {
            1 => "features (sub-mode 1 of 3)".into(),
            2 => "features (sub-mode 2 of 3)".into(),
            3 => "features (sub-mode 3 of 3)".into(),
            4 => "class components (intra-class)".into(),
            5 => "asset classes (inter-class)".into(),
            _ => format!("mode {core}"),
        }
    } else {
        format!("mode {core}")
    }
}

/// Cores ordered by summed change over all epochs, descending; ties keep the
/// lower core index first.
pub fn modal_ranking(log: &CoreChangeLog) -> Vec<RankedCore> {
    let n = log.num_cores();
    let mut ranked: Vec<RankedCore> = (1..=n)
        .map(|core| RankedCore {
            core,
            aggregate_change: log.aggregate(core),
            mode: mode_label(core, n),
        })
        .collect();
    ranked.sort_by(|a, b| b.aggregate_change.total_cmp(&a.aggregate_change));
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    fn core(vals: &[f64]) -> DenseTensor {
        DenseTensor::new(vec![1, 2, 2, 2], vals.to_vec()).unwrap()
    }

    #[test]
    fn identical_snapshots_give_zero() {
        let c = core(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let log = core_change(&[vec![c.clone()], vec![c.clone()], vec![c]]).unwrap();
        assert_eq!(log.values(), &[vec![0.0, 0.0]]);
        assert_eq!(log.entry_count(), 2);
    }

    #[test]
    fn uniform_perturbation() {
        let base = [0.5; 8];
        let moved: Vec<f64> = base.iter().map(|v| v + 0.1).collect();
        let log = core_change(&[vec![core(&base)], vec![core(&moved)]]).unwrap();
        assert!((log.get(1, 2) - 0.01).abs() < 1e-15);

        let moved2: Vec<f64> = base.iter().map(|v| v + 0.2).collect();
        let log2 = core_change(&[vec![core(&base)], vec![core(&moved2)]]).unwrap();
        assert!((log2.get(1, 2) / log.get(1, 2) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn shape_drift_rejected() {
        let a = DenseTensor::zeros(vec![1, 2, 2, 1]).unwrap();
        let b = DenseTensor::zeros(vec![1, 2, 2, 2]).unwrap();
        assert!(matches!(
            core_change(&[vec![a], vec![b]]),
            Err(InterpretError::ShapeDrift { core: 1, epoch: 2, .. })
        ));
        assert!(matches!(core_change(&[]), Err(InterpretError::TooFewSnapshots(0))));
    }

    #[test]
    fn ranking_order_and_ties() {
        let log = CoreChangeLog::from_values(
            vec![vec![]; 5],
            vec![vec![5.0, 5.0], vec![1.0, 1.0], vec![0.5, 1.5], vec![0.0, 0.1], vec![3.0, 3.0]],
        );
        let r = modal_ranking(&log);
        let order: Vec<usize> = r.iter().map(|c| c.core).collect();
        assert_eq!(order, vec![1, 5, 2, 3, 4]);
        assert_eq!(r[1].mode, "asset classes (inter-class)");

        let single = CoreChangeLog::from_values(vec![vec![]], vec![vec![0.0]]);
        assert_eq!(modal_ranking(&single)[0].core, 1);
    }

    #[test]
    fn csv_round_trip() {
        let log = CoreChangeLog::from_values(vec![vec![]; 2], vec![vec![0.1, 1e-9], vec![3.5, 0.0]]);
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("core,epoch,normalized_change\n1,2,"));
        let back = CoreChangeLog::read_csv(&buf[..]).unwrap();
        assert_eq!(back.values(), log.values());
    }
}
