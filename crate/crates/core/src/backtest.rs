//! Daily-rebalanced track record from model probabilities, with annualized
//! Sharpe, total return and directional accuracy.
//!
//! Positions are the signed expectation `p(+1) - p(-1)`; the position held on
//! day `t` earns the target's log-return from `t` to `t + 1`. Profits are
//! summed in log-return space and no transaction costs are charged.

use std::io::Write;

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::neural::{Label, NUM_CLASSES};

pub const TRADING_DAYS: f64 = 252.0;

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("not a probability distribution: {0:?}")]
    InvalidDistribution([f64; NUM_CLASSES]),
    #[error("daily returns have zero variance")]
    ZeroVariance,
    #[error("at least two observations are required")]
    TooFewObservations,
    #[error("empty series")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// `p(+1) - p(-1)` for each day.
pub fn size_positions(probs: &[[f64; NUM_CLASSES]]) -> Result<Vec<f64>, BacktestError> {
    probs
        .iter()
        .map(|p| {
            let valid = p.iter().all(|&v| (0.0..=1.0).contains(&v)) && (p.iter().sum::<f64>() - 1.0).abs() < 1e-9;
            if !valid {
                return Err(BacktestError::InvalidDistribution(*p));
            }
            Ok(p[Label::Up.class_index()] - p[Label::Down.class_index()])
        })
        .collect()
}

/// `sqrt(252) * mean / std` with the population standard deviation.
pub fn sharpe(daily_returns: &[f64]) -> Result<f64, BacktestError> {
    if daily_returns.len() < 2 {
        return Err(BacktestError::TooFewObservations);
    }
    let n = daily_returns.len() as f64;
    let mean = daily_returns.iter().sum::<f64>() / n;
    let var = daily_returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std <= 1e-15 * mean.abs() || std == 0.0 {
        return Err(BacktestError::ZeroVariance);
    }
    Ok(TRADING_DAYS.sqrt() * mean / std)
}

/// Fraction of days where the predicted class equals the realized class.
pub fn directional_accuracy(predicted: &[Label], actual: &[Label]) -> Result<f64, BacktestError> {
    if predicted.len() != actual.len() {
        return Err(BacktestError::LengthMismatch(predicted.len(), actual.len()));
    }
    if predicted.is_empty() {
        return Err(BacktestError::Empty);
    }
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Ok(hits as f64 / predicted.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackRecord {
    pub daily_returns: Vec<f64>,
    pub cumulative_profit: Vec<f64>,
    /// `None` when the returns have no variance.
    pub sharpe: Option<f64>,
    pub total_return: f64,
}

impl TrackRecord {
    fn from_returns(daily_returns: Vec<f64>) -> Self {
        let cumulative_profit: Vec<f64> = daily_returns
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect();
        let total_return = cumulative_profit.last().copied().unwrap_or(0.0);
        TrackRecord {
            sharpe: sharpe(&daily_returns).ok(),
            daily_returns,
            cumulative_profit,
            total_return,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BacktestReport {
    pub daily_positions: Vec<f64>,
    pub strategy: TrackRecord,
    /// Constant unit long position in the target.
    pub baseline: TrackRecord,
    /// Set when predicted and realized classes are supplied.
    pub accuracy: Option<f64>,
}

/// `positions[t]` earns `next_returns[t]`.
pub fn run_backtest(positions: &[f64], next_returns: &[f64]) -> Result<BacktestReport, BacktestError> {
    if positions.len() != next_returns.len() {
        return Err(BacktestError::LengthMismatch(positions.len(), next_returns.len()));
    }
    let strategy = positions.iter().zip(next_returns).map(|(p, r)| p * r).collect();
    Ok(BacktestReport {
        daily_positions: positions.to_vec(),
        strategy: TrackRecord::from_returns(strategy),
        baseline: TrackRecord::from_returns(next_returns.to_vec()),
        accuracy: None,
    })
}

/// Full evaluation from per-day probabilities and realized labels.
pub fn evaluate(
    probs: &[[f64; NUM_CLASSES]],
    next_returns: &[f64],
    actual: &[Label],
) -> Result<BacktestReport, BacktestError> {
    let positions = size_positions(probs)?;
    let mut report = run_backtest(&positions, next_returns)?;
    let predicted: Vec<Label> = probs.iter().map(Label::argmax).collect();
    report.accuracy = Some(directional_accuracy(&predicted, actual)?);
    Ok(report)
}

#[derive(Serialize)]
struct MetricsJson<'a> {
    sharpe: Option<f64>,
    sharpe_defined: bool,
    total_return: f64,
    accuracy: Option<f64>,
    days: usize,
    baseline: BaselineJson<'a>,
}

#[derive(Serialize)]
struct BaselineJson<'a> {
    label: &'a str,
    sharpe: Option<f64>,
    sharpe_defined: bool,
    total_return: f64,
}

impl BacktestReport {
    /// Metrics summary; an undefined Sharpe is written as `null` with
    /// `sharpe_defined: false`.
    pub fn write_json<W: Write>(&self, out: W, baseline_label: &str) -> Result<(), BacktestError> {
        let json = MetricsJson {
            sharpe: self.strategy.sharpe,
            sharpe_defined: self.strategy.sharpe.is_some(),
            total_return: self.strategy.total_return,
            accuracy: self.accuracy,
            days: self.daily_positions.len(),
            baseline: BaselineJson {
                label: baseline_label,
                sharpe: self.baseline.sharpe,
                sharpe_defined: self.baseline.sharpe.is_some(),
                total_return: self.baseline.total_return,
            },
        };
        serde_json::to_writer_pretty(out, &json)?;
        Ok(())
    }

    /// `date,position,daily_return,cumulative_profit,baseline_cumulative`.
    pub fn write_csv<W: Write>(&self, out: W, dates: &[NaiveDate]) -> Result<(), BacktestError> {
        if dates.len() != self.daily_positions.len() {
            return Err(BacktestError::LengthMismatch(dates.len(), self.daily_positions.len()));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "position", "daily_return", "cumulative_profit", "baseline_cumulative"])?;
        for (t, date) in dates.iter().enumerate() {
            w.write_record([
                date.format("%Y-%m-%d").to_string(),
                self.daily_positions[t].to_string(),
                self.strategy.daily_returns[t].to_string(),
                self.strategy.cumulative_profit[t].to_string(),
                self.baseline.cumulative_profit[t].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
