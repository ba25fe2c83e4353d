//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! data = synth                # or a path to a manifest CSV
//! target = JPYUSD
//! split = 0.9
//! seq_len = 10
//! epochs = 20
//! batch_size = 66
//! learning_rate = 1e-5
//! in_dims = 2,2,5,6,4
//! hidden_dims = 4,4,4,4,4
//! ranks = 6                   # or the full tuple 1,6,6,6,6,1
//! seed = 0
//! output = run
//! synth_days = 3300
//! synth_signal = 0
//! synth_signal_source = SPX
//! components = 6
//! ```
//!
//! Keys may appear in any order; later assignments win, and command-line
//! overrides are applied with [`RunConfig::set`] after the file is read.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::PipelineError;
use crate::features::synth::SynthConfig;
use crate::features::NUM_CLASSES as NUM_ASSET_CLASSES;
use crate::neural::{ModelShape, TrainConfig};
use crate::textio::{join_dims, parse_dims};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Synth,
    Manifest(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub data: DataSource,
    pub target: String,
    pub split: f64,
    pub seq_len: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub in_dims: Vec<usize>,
    pub hidden_dims: Vec<usize>,
    /// Full tuple `(R_0, ..., R_N)`.
    pub ranks: Vec<usize>,
    pub seed: u64,
    pub output: PathBuf,
    pub synth_days: usize,
    pub synth_signal: f64,
    pub synth_signal_source: String,
    pub components: usize,
}

/// Rank given as a single inner value or a full tuple; resolved once the
/// number of modes is known.
#[derive(Clone, Debug)]
enum RankSpec {
    Uniform(usize),
    Full(Vec<usize>),
}

impl Default for RunConfig {
    fn default() -> Self {
        let shape = ModelShape::default_forecaster();
        let train = TrainConfig::default();
        let synth = SynthConfig::default();
        RunConfig {
            data: DataSource::Synth,
            target: synth.target,
            split: 0.9,
            seq_len: train.seq_len,
            epochs: train.epochs,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
            in_dims: shape.in_dims,
            hidden_dims: shape.hidden_dims,
            ranks: shape.ranks,
            seed: 0,
            output: PathBuf::from("run"),
            synth_days: synth.days,
            synth_signal: synth.signal_strength,
            synth_signal_source: synth.signal_source,
            components: synth.components,
        }
    }
}

fn config_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, PipelineError> {
    value
        .parse()
        .map_err(|_| config_err(format!("{key}: cannot parse {value:?}")))
}

fn parse_tuple(key: &str, value: &str) -> Result<Vec<usize>, PipelineError> {
    let inner = value.trim().trim_start_matches('(').trim_end_matches(')');
    match parse_dims(&inner.replace(' ', "")) {
        Some(d) if !d.is_empty() => Ok(d),
        _ => Err(config_err(format!("{key}: expected a comma-separated tuple, got {value:?}"))),
    }
}

impl RunConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), PipelineError> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", k + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| config_err(format!("line {}: {e}", k + 1)))?;
        }
        Ok(())
    }

    /// Sets one key. Changing `in_dims` keeps the current inner rank when
    /// the mode count changes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        match key {
            "data" => {
                self.data = if value == "synth" {
                    DataSource::Synth
                } else {
                    DataSource::Manifest(PathBuf::from(value))
                }
            }
            "target" => self.target = value.to_string(),
            "split" => self.split = parse_num(key, value)?,
            "seq_len" => self.seq_len = parse_num(key, value)?,
            "epochs" => self.epochs = parse_num(key, value)?,
            "batch_size" => self.batch_size = parse_num(key, value)?,
            "learning_rate" => self.learning_rate = parse_num(key, value)?,
            "in_dims" => {
                self.in_dims = parse_tuple(key, value)?;
                self.resize_ranks();
            }
            "hidden_dims" => {
                self.hidden_dims = parse_tuple(key, value)?;
                self.resize_ranks();
            }
            "ranks" => {
                let spec = if value.contains(',') {
                    RankSpec::Full(parse_tuple(key, value)?)
                } else {
                    RankSpec::Uniform(parse_num(key, value)?)
                };
                self.ranks = self.resolve_ranks(spec);
            }
            "seed" => self.seed = parse_num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "synth_days" => self.synth_days = parse_num(key, value)?,
            "synth_signal" => self.synth_signal = parse_num(key, value)?,
            "synth_signal_source" => self.synth_signal_source = value.to_string(),
            "components" => {
                self.components = parse_num(key, value)?;
                if self.in_dims.len() == 5 {
                    self.in_dims[3] = self.components;
                }
            }
            other => return Err(config_err(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    fn inner_rank(&self) -> usize {
        self.ranks.get(1).copied().filter(|_| self.ranks.len() > 2).unwrap_or(1)
    }

    fn resolve_ranks(&self, spec: RankSpec) -> Vec<usize> {
        match spec {
            RankSpec::Full(r) => r,
            RankSpec::Uniform(r) => {
                ModelShape::uniform(self.in_dims.clone(), self.hidden_dims.clone(), r).ranks
            }
        }
    }

    fn resize_ranks(&mut self) {
        if self.ranks.len() != self.in_dims.len() + 1 {
            self.ranks = self.resolve_ranks(RankSpec::Uniform(self.inner_rank()));
        }
    }

    pub fn model_shape(&self) -> ModelShape {
        ModelShape {
            in_dims: self.in_dims.clone(),
            hidden_dims: self.hidden_dims.clone(),
            ranks: self.ranks.clone(),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seq_len: self.seq_len,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            days: self.synth_days,
            components: self.components,
            signal_strength: self.synth_signal,
            signal_source: self.synth_signal_source.clone(),
            target: self.target.clone(),
            seed: self.seed,
            ..SynthConfig::default()
        }
    }

    /// Checks everything that can be checked without touching the data.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(config_err(format!("split {} must lie in (0, 1)", self.split)));
        }
        self.model_shape().validate()?;
        self.train_config().validate()?;
        Ok(())
    }

    /// The input modes must be the feature tensor's `(2, 2, 5, K, 4)`.
    pub fn check_input_dims(&self, components: usize) -> Result<(), PipelineError> {
        let expected = vec![2, 2, 5, components, NUM_ASSET_CLASSES];
        if self.in_dims != expected {
            return Err(PipelineError::Shape(format!(
                "in_dims ({}) do not match the feature tensor ({})",
                join_dims(&self.in_dims),
                join_dims(&expected)
            )));
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; reading it back gives the same config.
    pub fn to_text(&self) -> String {
        let data = match &self.data {
            DataSource::Synth => "synth".to_string(),
            DataSource::Manifest(p) => p.display().to_string(),
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("data", data);
        kv("target", self.target.clone());
        kv("split", self.split.to_string());
        kv("seq_len", self.seq_len.to_string());
        kv("epochs", self.epochs.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("learning_rate", format!("{:e}", self.learning_rate));
        kv("in_dims", join_dims(&self.in_dims));
        kv("hidden_dims", join_dims(&self.hidden_dims));
        kv("ranks", join_dims(&self.ranks));
        kv("seed", self.seed.to_string());
        kv("output", self.output.display().to_string());
        kv("synth_days", self.synth_days.to_string());
        kv("synth_signal", self.synth_signal.to_string());
        kv("synth_signal_source", self.synth_signal_source.clone());
        kv("components", self.components.to_string());
        s
    }
}
