//! Multi-way feature tensors from aligned daily market data.
//!
//! Every instrument contributes 20 features per day, stacked into
//! `Z_t` of shape `(20, components, 4)` (features x class components x asset
//! classes) and reshaped to `X_t` of shape `(2, 2, 5, components, 4)`. The
//! feature axis is ordered as [`FEATURE_NAMES`]; the asset-class axis as
//! [`AssetClass::ALL`].

pub mod indicators;
pub mod io;
pub mod synth;

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::neural::{Label, NeuralError, SampleRef, SequenceDataset};
use crate::tensor::{DenseTensor, TensorError};

use indicators::{hl_spread, log_diff, rel_hlc, rel_minmax, rolling_stats, WINDOWS};

pub const NUM_FEATURES: usize = 20;
pub const NUM_CLASSES: usize = 4;
/// Index of the first date with every rolling window filled.
pub const WARMUP: usize = 22;
/// Target moves within this band are labelled flat.
pub const FLAT_BAND: f64 = 1e-4;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "log_diff",
    "mean_5",
    "mean_10",
    "mean_22",
    "std_5",
    "std_10",
    "std_22",
    "skew_5",
    "skew_10",
    "skew_22",
    "kurt_5",
    "kurt_10",
    "kurt_22",
    "rel_minmax_5",
    "rel_minmax_10",
    "rel_minmax_22",
    "rel_hlc",
    "hl_spread",
    "volume",
    "open_interest",
];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("non-positive price {0}")]
    NonPositivePrice(f64),
    #[error("window {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("misaligned dates: {0}")]
    MisalignedDates(String),
    #[error("insufficient history: {0}")]
    InsufficientHistory(String),
    #[error("unknown target symbol {0}")]
    UnknownTarget(String),
    #[error("invalid panel layout: {0}")]
    InvalidLayout(String),
    #[error("invalid bar for {symbol} on {date}: {reason}")]
    InvalidBar {
        symbol: String,
        date: NaiveDate,
        reason: String,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {reason}")]
    Parse { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AssetClass {
    Equities,
    Currencies,
    Commodities,
    FixedIncome,
}

impl AssetClass {
    pub const ALL: [AssetClass; NUM_CLASSES] = [
        AssetClass::Equities,
        AssetClass::Currencies,
        AssetClass::Commodities,
        AssetClass::FixedIncome,
    ];

    /// Position along the asset-class mode.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AssetClass::Equities => "equities",
            AssetClass::Currencies => "currencies",
            AssetClass::Commodities => "commodities",
            AssetClass::FixedIncome => "fixed_income",
        }
    }
}

impl fmt::Display for AssetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AssetClass {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, FeatureError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equities" => Ok(AssetClass::Equities),
            "currencies" => Ok(AssetClass::Currencies),
            "commodities" => Ok(AssetClass::Commodities),
            "fixed_income" => Ok(AssetClass::FixedIncome),
            other => Err(FeatureError::InvalidLayout(format!("unknown asset class {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bar {
    pub close: f64,
    pub high: f64,
    pub low: f64,
    pub volume: f64,
    pub open_interest: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    pub symbol: String,
    pub asset_class: AssetClass,
    /// 1-based position within the asset class.
    pub class_slot: usize,
    pub bars: Vec<Bar>,
}

impl Instrument {
    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }
}

/// Daily bars for `4 x components` instruments on one shared date index.
#[derive(Clone, Debug, PartialEq)]
pub struct AssetPanel {
    dates: Vec<NaiveDate>,
    instruments: Vec<Instrument>,
    components: usize,
}

impl AssetPanel {
    pub fn new(dates: Vec<NaiveDate>, instruments: Vec<Instrument>) -> Result<Self, FeatureError> {
        if instruments.is_empty() || !instruments.len().is_multiple_of(NUM_CLASSES) {
            return Err(FeatureError::InvalidLayout(format!(
                "{} instruments cannot fill {} asset classes evenly",
                instruments.len(),
                NUM_CLASSES
            )));
        }
        let components = instruments.len() / NUM_CLASSES;
        let mut seen = vec![false; instruments.len()];
        for inst in &instruments {
            if inst.class_slot == 0 || inst.class_slot > components {
                return Err(FeatureError::InvalidLayout(format!(
                    "{}: slot {} outside 1..={components}",
                    inst.symbol, inst.class_slot
                )));
            }
            let k = inst.asset_class.index() * components + inst.class_slot - 1;
            if std::mem::replace(&mut seen[k], true) {
                return Err(FeatureError::InvalidLayout(format!(
                    "{} slot {} is filled twice",
                    inst.asset_class, inst.class_slot
                )));
            }
            if inst.bars.len() != dates.len() {
                return Err(FeatureError::MisalignedDates(format!(
                    "{} has {} bars for {} dates",
                    inst.symbol,
                    inst.bars.len(),
                    dates.len()
                )));
            }
            for (bar, &date) in inst.bars.iter().zip(&dates) {
                let bad = |reason: &str| {
                    Err(FeatureError::InvalidBar {
                        symbol: inst.symbol.clone(),
                        date,
                        reason: reason.into(),
                    })
                };
                if !(bar.close > 0.0 && bar.high > 0.0 && bar.low > 0.0) {
                    return bad("prices must be positive");
                }
                if bar.high < bar.low {
                    return bad("high below low");
                }
                if !(bar.volume.is_finite() && bar.open_interest.is_finite()) {
                    return bad("non-finite volume or open interest");
                }
            }
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FeatureError::MisalignedDates("dates must be strictly increasing".into()));
        }
        Ok(AssetPanel {
            dates,
            instruments,
            components,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn instruments(&self) -> &[Instrument] {
        &self.instruments
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn instrument(&self, symbol: &str) -> Option<&Instrument> {
        self.instruments.iter().find(|i| i.symbol == symbol)
    }

    /// Panel restricted to the first `days` dates.
    pub fn truncate(&self, days: usize) -> AssetPanel {
        let days = days.min(self.dates.len());
        AssetPanel {
            dates: self.dates[..days].to_vec(),
            instruments: self
                .instruments
                .iter()
                .map(|i| Instrument {
                    bars: i.bars[..days].to_vec(),
                    ..i.clone()
                })
                .collect(),
            components: self.components,
        }
    }
}

/// Per-date feature rows of one instrument for dates `WARMUP..len`.
fn instrument_features(inst: &Instrument) -> Result<Vec<[f64; NUM_FEATURES]>, FeatureError> {
    let closes = inst.closes();
    let n = closes.len();
    let r = log_diff(&closes)?;
    let stats = WINDOWS
        .iter()
        .map(|&w| rolling_stats(&r, w))
        .collect::<Result<Vec<_>, _>>()?;
    let minmax = WINDOWS
        .iter()
        .map(|&w| rel_minmax(&closes, w))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(n.saturating_sub(WARMUP));
    for t in WARMUP..n {
        let bar = &inst.bars[t];
        let mut row = [0.0; NUM_FEATURES];
        row[0] = r[t - 1];
        for (w, (&win, s)) in WINDOWS.iter().zip(&stats).enumerate() {
            let k = t - win;
            row[1 + w] = s.mean[k];
            row[4 + w] = s.std[k];
            row[7 + w] = s.skew[k];
            row[10 + w] = s.kurt[k];
        }
        for (w, (&win, m)) in WINDOWS.iter().zip(&minmax).enumerate() {
            row[13 + w] = m[t + 1 - win];
        }
        row[16] = rel_hlc(bar.close, bar.high, bar.low);
        row[17] = hl_spread(bar.high, bar.low);
        row[18] = bar.volume;
        row[19] = bar.open_interest;
        rows.push(row);
    }
    Ok(rows)
}

/// Per-entry z-score statistics over the training dates.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    fn fit(rows: &[DenseTensor]) -> Self {
        let len = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; len];
        for z in rows {
            for (m, v) in mean.iter_mut().zip(z.data()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; len];
        for z in rows {
            for ((s, v), m) in var.iter_mut().zip(z.data()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                if sd <= 1e-12 * m.abs().max(1e-300) || sd == 0.0 {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Normalization { mean, std }
    }

    /// Degenerate entries (zero spread on the training split) map to 0.
    pub fn apply(&self, z: &DenseTensor) -> DenseTensor {
        let data = z
            .data()
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect();
        DenseTensor::new(z.dims().to_vec(), data).expect("same shape")
    }
}

/// Feature tensors, labels and target returns on the usable dates.
#[derive(Clone, Debug)]
pub struct FeaturePanel {
    dates: Vec<NaiveDate>,
    raw: Vec<DenseTensor>,
    labels: Vec<Label>,
    next_returns: Vec<f64>,
    train_len: usize,
    normalization: Normalization,
    components: usize,
    target: String,
}

impl FeaturePanel {
    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    /// Raw `Z_t` of shape `(20, components, 4)`.
    pub fn z(&self, t: usize) -> &DenseTensor {
        &self.raw[t]
    }

    pub fn raw(&self) -> &[DenseTensor] {
        &self.raw
    }

    /// Normalized `X_t` of shape `(2, 2, 5, components, 4)`.
    pub fn x(&self, t: usize) -> DenseTensor {
        self.normalization
            .apply(&self.raw[t])
            .into_reshaped(self.input_dims())
            .expect("20 = 2 * 2 * 5")
    }

    pub fn input_dims(&self) -> Vec<usize> {
        vec![2, 2, 5, self.components, NUM_CLASSES]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Target log-return from `t` to `t + 1`.
    pub fn next_returns(&self) -> &[f64] {
        &self.next_returns
    }

    /// Number of leading dates in the training split.
    pub fn train_len(&self) -> usize {
        self.train_len
    }

    pub fn normalization(&self) -> &Normalization {
        &self.normalization
    }

    /// Sliding windows of `seq_len` consecutive `X_t` with stride 1, split by
    /// the date of each window's last step.
    pub fn datasets(&self, seq_len: usize) -> Result<(SequenceDataset, SequenceDataset), FeatureError> {
        self.datasets_with(seq_len, Execution::default())
    }

    pub fn datasets_with(
        &self,
        seq_len: usize,
        execution: Execution,
    ) -> Result<(SequenceDataset, SequenceDataset), FeatureError> {
        if seq_len == 0 || seq_len > self.train_len {
            return Err(FeatureError::InsufficientHistory(format!(
                "sequence length {seq_len} needs at least that many training dates, have {}",
                self.train_len
            )));
        }
        let steps = exec::map_range(execution, self.len(), |t| self.x(t));
        let sample = |end: usize| SampleRef {
            start: end + 1 - seq_len,
            label: self.labels[end],
        };
        let train: Vec<SampleRef> = (seq_len - 1..self.train_len).map(sample).collect();
        let test: Vec<SampleRef> = (self.train_len..self.len()).map(sample).collect();
        Ok((
            SequenceDataset::new(steps.clone(), train, seq_len)?,
            SequenceDataset::new(steps, test, seq_len)?,
        ))
    }

    /// Last-step date index of each test window, in test-sample order.
    pub fn test_dates(&self) -> std::ops::Range<usize> {
        self.train_len..self.len()
    }
}

pub fn label_for(next_return: f64) -> Label {
    if next_return > FLAT_BAND {
        Label::Up
    } else if next_return < -FLAT_BAND {
        Label::Down
    } else {
        Label::Flat
    }
}

/// Builds the feature panel: features for dates `WARMUP ..= len - 2`, labels
/// from the target's next-day return, z-scoring fit on the first
/// `floor(split * dates)` dates.
pub fn assemble(panel: &AssetPanel, target: &str, split: f64) -> Result<FeaturePanel, FeatureError> {
    assemble_with(panel, target, split, Execution::default())
}

pub fn assemble_with(
    panel: &AssetPanel,
    target: &str,
    split: f64,
    execution: Execution,
) -> Result<FeaturePanel, FeatureError> {
    if !(split > 0.0 && split < 1.0) {
        return Err(FeatureError::InvalidConfig(format!("split {split} must lie in (0, 1)")));
    }
    let target_inst = panel
        .instrument(target)
        .ok_or_else(|| FeatureError::UnknownTarget(target.to_string()))?;
    let days = panel.dates.len();
    if days < WARMUP + 2 {
        return Err(FeatureError::InsufficientHistory(format!(
            "{days} days; need at least {} for warm-up and one label",
            WARMUP + 2
        )));
    }
    let n = days - WARMUP - 1;
    let train_len = (split * n as f64).floor() as usize;
    if train_len == 0 || train_len >= n {
        return Err(FeatureError::InsufficientHistory(format!(
            "split {split} of {n} dates leaves an empty training or test set"
        )));
    }

    let per_instrument = exec::map(execution, &panel.instruments, instrument_features)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let comps = panel.components;
    let raw: Vec<DenseTensor> = (0..n)
        .map(|t| {
            let mut z = DenseTensor::zeros(vec![NUM_FEATURES, comps, NUM_CLASSES]).expect("valid shape");
            for (inst, rows) in panel.instruments.iter().zip(&per_instrument) {
                for (f, &v) in rows[t].iter().enumerate() {
                    z.set(&[f, inst.class_slot - 1, inst.asset_class.index()], v);
                }
            }
            z
        })
        .collect();

    let closes = target_inst.closes();
    let next_returns: Vec<f64> = (WARMUP..WARMUP + n)
        .map(|t| closes[t + 1].ln() - closes[t].ln())
        .collect();
    let labels = next_returns.iter().map(|&r| label_for(r)).collect();
    let normalization = Normalization::fit(&raw[..train_len]);

    Ok(FeaturePanel {
        dates: panel.dates[WARMUP..WARMUP + n].to_vec(),
        raw,
        labels,
        next_returns,
        train_len,
        normalization,
        components: comps,
        target: target.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use synth::{synth_panel, SynthConfig};

    fn panel(days: usize) -> AssetPanel {
        synth_panel(&SynthConfig {
            days,
            ..SynthConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn shapes_and_counts() {
        let p = panel(80);
        let f = assemble(&p, "JPYUSD", 0.9).unwrap();
        assert_eq!(f.len(), 80 - WARMUP - 1);
        assert_eq!(f.z(0).dims(), &[20, 6, 4]);
        assert_eq!(f.x(0).dims(), &[2, 2, 5, 6, 4]);
        assert_eq!(FEATURE_NAMES.len(), 20);
    }

    #[test]
    fn normalized_x_is_reshaped_z() {
        let f = assemble(&panel(60), "JPYUSD", 0.8).unwrap();
        for t in [0, 5, f.len() - 1] {
            let z = f.normalization().apply(f.z(t));
            assert_eq!(f.x(t).data(), z.data());
        }
    }

    #[test]
    fn constant_feature_normalizes_to_zero() {
        // currencies carry no volume in the synthetic panel
        let f = assemble(&panel(60), "JPYUSD", 0.8).unwrap();
        let x = f.x(3);
        for slot in 0..6 {
            assert_eq!(x.get(&[0, 1, 4, slot, AssetClass::Currencies.index()]), 0.0);
        }
    }

    #[test]
    fn flat_band_labels() {
        assert_eq!(label_for(5e-5), Label::Flat);
        assert_eq!(label_for(-1e-4), Label::Flat);
        assert_eq!(label_for(2e-4), Label::Up);
        assert_eq!(label_for(-2e-4), Label::Down);
    }

    #[test]
    fn errors() {
        let p = panel(60);
        assert!(matches!(assemble(&p, "NOPE", 0.9), Err(FeatureError::UnknownTarget(_))));
        assert!(matches!(assemble(&p, "JPYUSD", 1.0), Err(FeatureError::InvalidConfig(_))));
        assert!(matches!(
            assemble(&p.truncate(23), "JPYUSD", 0.5),
            Err(FeatureError::InsufficientHistory(_))
        ));
        let mut inst = p.instruments().to_vec();
        inst[3].bars.pop();
        assert!(matches!(
            AssetPanel::new(p.dates().to_vec(), inst),
            Err(FeatureError::MisalignedDates(_))
        ));
        let mut dup = p.instruments().to_vec();
        dup[1].class_slot = 1;
        assert!(matches!(
            AssetPanel::new(p.dates().to_vec(), dup),
            Err(FeatureError::InvalidLayout(_))
        ));
    }

    #[test]
    fn training_split_is_standardized() {
        let f = assemble(&panel(120), "JPYUSD", 0.9).unwrap();
        let n = f.train_len();
        let xs: Vec<DenseTensor> = (0..n).map(|t| f.x(t)).collect();
        for k in 0..xs[0].len() {
            let mean = xs.iter().map(|x| x.data()[k]).sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x.data()[k] - mean).powi(2)).sum::<f64>() / n as f64;
            assert!(mean.abs() < 1e-10);
            if f.normalization().std[k] > 0.0 {
                assert!((var.sqrt() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn windows_split_on_last_date() {
        let f = assemble(&panel(100), "JPYUSD", 0.75).unwrap();
        let (train, test) = f.datasets(10).unwrap();
        assert_eq!(train.len(), f.train_len() - 9);
        assert_eq!(test.len(), f.len() - f.train_len());
        let (xs, label) = test.sample(0);
        assert_eq!(xs.len(), 10);
        assert_eq!(label, f.labels()[f.train_len()]);
        assert_eq!(xs[9], f.x(f.train_len()));
    }
}
