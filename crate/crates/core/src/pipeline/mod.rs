//! End-to-end commands: synthesize or ingest data, build features, train,
//! backtest, report core changes and decompose tensors.
//!
//! Every command takes a resolved [`RunConfig`] (or explicit paths) and writes
//! plain files into the run's output directory. Training writes
//! `run_manifest.json` with the resolved config, the seed and SHA-256 hashes
//! of every input file, which is enough to reproduce the run bit for bit.

mod checkpoint;
mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use checkpoint::Checkpoint;
pub use config::{DataSource, RunConfig};

use crate::backtest::{self, BacktestError};
use crate::exec::Execution;
use crate::features::{self, io as fio, synth, AssetPanel, FeatureError, FeaturePanel};
use crate::interpret::{modal_ranking, CoreChangeLog, InterpretError, RankedCore};
use crate::neural::{self, init_model, NeuralError};
use crate::rng;
use crate::tensor::TensorError;
use crate::textio::{self, TextError, TextReader};
use crate::tt::{self, Truncation, TtError};

pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const CORE_CHANGES_FILE: &str = "core_changes.csv";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";
pub const RESOLVED_CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl PipelineError {
    /// Process exit code: 2 config, 3 data, 4 shape, 5 i/o, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Data(_) => 3,
            PipelineError::Shape(_) => 4,
            PipelineError::Io(_) => 5,
            PipelineError::Other(_) => 1,
        }
    }
}

impl From<FeatureError> for PipelineError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::InvalidConfig(m) => PipelineError::Config(m),
            FeatureError::Io(e) => PipelineError::Io(e),
            FeatureError::Tensor(e) => PipelineError::Shape(e.to_string()),
            FeatureError::Neural(e) => e.into(),
            other => PipelineError::Data(other.to_string()),
        }
    }
}

impl From<NeuralError> for PipelineError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::InvalidConfig(m) => PipelineError::Config(m),
            e @ (NeuralError::ShapeMismatch { .. } | NeuralError::CacheMismatch | NeuralError::Tensor(_)) => {
                PipelineError::Shape(e.to_string())
            }
            other => PipelineError::Other(other.to_string()),
        }
    }
}

impl From<TensorError> for PipelineError {
    fn from(e: TensorError) -> Self {
        PipelineError::Shape(e.to_string())
    }
}

impl From<TtError> for PipelineError {
    fn from(e: TtError) -> Self {
        match e {
            TtError::InvalidRank(m) => PipelineError::Config(m),
            TtError::SvdFailed => PipelineError::Other(e.to_string()),
            other => PipelineError::Shape(other.to_string()),
        }
    }
}

impl From<TextError> for PipelineError {
    fn from(e: TextError) -> Self {
        match e {
            TextError::Io(e) => PipelineError::Io(e),
            other => PipelineError::Data(other.to_string()),
        }
    }
}

impl From<BacktestError> for PipelineError {
    fn from(e: BacktestError) -> Self {
        match e {
            BacktestError::Io(e) => PipelineError::Io(e),
            BacktestError::LengthMismatch(..) => PipelineError::Shape(e.to_string()),
            other => PipelineError::Data(other.to_string()),
        }
    }
}

impl From<InterpretError> for PipelineError {
    fn from(e: InterpretError) -> Self {
        match e {
            InterpretError::Io(e) => PipelineError::Io(e),
            other => PipelineError::Data(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for PipelineError {
    fn from(e: serde_json::Error) -> Self {
        PipelineError::Other(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Loads the configured panel and hashes its input files (none for synth).
pub fn load_panel(cfg: &RunConfig) -> Result<(AssetPanel, Vec<InputHash>), PipelineError> {
    match &cfg.data {
        DataSource::Synth => Ok((synth::synth_panel(&cfg.synth_config())?, Vec::new())),
        DataSource::Manifest(path) => {
            let mut files = vec![path.clone()];
            files.extend(fio::manifest_files(path)?);
            let hashes = files
                .iter()
                .map(|p| {
                    Ok(InputHash {
                        path: p.display().to_string(),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect::<Result<_, PipelineError>>()?;
            Ok((fio::read_panel(path)?, hashes))
        }
    }
}

/// Loads the panel and builds the feature panel with the configured split.
pub fn load_features(cfg: &RunConfig) -> Result<(AssetPanel, FeaturePanel, Vec<InputHash>), PipelineError> {
    cfg.validate()?;
    let (panel, hashes) = load_panel(cfg)?;
    let feats = features::assemble(&panel, &cfg.target, cfg.split)?;
    Ok((panel, feats, hashes))
}

fn create_output(cfg: &RunConfig) -> Result<&Path, PipelineError> {
    std::fs::create_dir_all(&cfg.output)?;
    Ok(&cfg.output)
}

/// Writes the synthetic panel's CSVs and manifest; returns the manifest path.
pub fn cmd_synth(cfg: &RunConfig) -> Result<PathBuf, PipelineError> {
    let panel = synth::synth_panel(&cfg.synth_config())?;
    Ok(fio::write_panel(&panel, &cfg.output)?)
}

/// Writes the raw feature audit dump; returns its path.
pub fn cmd_features(cfg: &RunConfig) -> Result<PathBuf, PipelineError> {
    let (panel, feats, _) = load_features(cfg)?;
    let path = create_output(cfg)?.join("features.csv");
    fio::write_feature_dump_file(&panel, &feats, &path)?;
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterReport {
    /// Entries in the TT cores of the input-to-hidden map.
    pub tt_params: usize,
    /// Entries of the same map stored densely.
    pub dense_params: usize,
    pub compression: f64,
}

impl ParameterReport {
    pub fn for_config(cfg: &RunConfig) -> Result<Self, PipelineError> {
        let tt_params = tt::tt_param_count(&cfg.in_dims, &cfg.hidden_dims, &cfg.ranks)?;
        let dense_params = cfg.in_dims.iter().product::<usize>() * cfg.hidden_dims.iter().product::<usize>();
        Ok(ParameterReport {
            tt_params,
            dense_params,
            compression: dense_params as f64 / tt_params as f64,
        })
    }
}

impl std::fmt::Display for ParameterReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "TT input layer: {} parameters (dense: {}, compression {:.1}x)",
            self.tt_params, self.dense_params, self.compression
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainReport {
    pub parameters: ParameterReport,
    pub train_samples: usize,
    pub test_samples: usize,
    pub epoch_losses: Vec<f64>,
    pub output: PathBuf,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a RunConfig,
    seed: u64,
    inputs: &'a [InputHash],
    parameters: &'a ParameterReport,
    train_samples: usize,
    test_samples: usize,
    artifacts: [&'static str; 4],
}

/// Trains from a fresh initialization and writes the checkpoint, per-epoch
/// loss log, core-change log, resolved config and run manifest.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport, PipelineError> {
    cmd_train_with(cfg, Execution::default())
}

pub fn cmd_train_with(cfg: &RunConfig, execution: Execution) -> Result<TrainReport, PipelineError> {
    let (_, feats, hashes) = load_features(cfg)?;
    cfg.check_input_dims(feats.components())?;
    let parameters = ParameterReport::for_config(cfg)?;
    let (train_set, test_set) = feats.datasets_with(cfg.seq_len, execution)?;
    let model = init_model(&cfg.model_shape(), &mut rng::stream(cfg.seed, "init"))?;
    let train_cfg = neural::TrainConfig {
        execution,
        ..cfg.train_config()
    };
    let outcome = neural::train(model, &train_set, &train_cfg)?;

    let out = create_output(cfg)?;
    Checkpoint {
        seed: cfg.seed,
        epochs: cfg.epochs,
        model: outcome.model,
    }
    .save(&out.join(CHECKPOINT_FILE))?;
    outcome
        .change_log
        .write_csv(BufWriter::new(File::create(out.join(CORE_CHANGES_FILE))?))?;
    let mut log = BufWriter::new(File::create(out.join(TRAIN_LOG_FILE))?);
    writeln!(log, "epoch,train_loss")?;
    for (e, loss) in outcome.epoch_losses.iter().enumerate() {
        writeln!(log, "{},{loss:e}", e + 1)?;
    }
    log.flush()?;
    std::fs::write(out.join(RESOLVED_CONFIG_FILE), cfg.to_text())?;
    let manifest = RunManifest {
        config: cfg,
        seed: cfg.seed,
        inputs: &hashes,
        parameters: &parameters,
        train_samples: train_set.len(),
        test_samples: test_set.len(),
        artifacts: [CHECKPOINT_FILE, TRAIN_LOG_FILE, CORE_CHANGES_FILE, RESOLVED_CONFIG_FILE],
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    std::fs::write(out.join(RUN_MANIFEST_FILE), json)?;

    Ok(TrainReport {
        parameters,
        train_samples: train_set.len(),
        test_samples: test_set.len(),
        epoch_losses: outcome.epoch_losses,
        output: out.to_path_buf(),
    })
}

/// Evaluates a checkpoint on the test split; writes `backtest.json` and
/// `backtest.csv` into the output directory.
pub fn cmd_backtest(cfg: &RunConfig, checkpoint: &Path) -> Result<backtest::BacktestReport, PipelineError> {
    let ck = Checkpoint::load(checkpoint)?;
    let (_, feats, _) = load_features(cfg)?;
    let model_in = ck.model.input_layer().in_dims();
    if model_in != feats.input_dims() {
        return Err(PipelineError::Shape(format!(
            "checkpoint expects inputs ({}) but the data gives ({})",
            textio::join_dims(&model_in),
            textio::join_dims(&feats.input_dims())
        )));
    }
    let (_, test_set) = feats.datasets(cfg.seq_len)?;
    let probs = test_set.predict(&ck.model, Execution::default())?;
    let range = feats.test_dates();
    let report = backtest::evaluate(
        &probs,
        &feats.next_returns()[range.clone()],
        &feats.labels()[range.clone()],
    )?;
    let out = create_output(cfg)?;
    let mut json = BufWriter::new(File::create(out.join("backtest.json"))?);
    report.write_json(&mut json, &format!("buy-and-hold {}", cfg.target))?;
    writeln!(json)?;
    json.flush()?;
    report.write_csv(
        BufWriter::new(File::create(out.join("backtest.csv"))?),
        &feats.dates()[range],
    )?;
    Ok(report)
}

#[derive(Serialize)]
struct RankingJson<'a> {
    num_cores: usize,
    epochs_logged: usize,
    ranking: &'a [RankedCore],
}

/// Ranks cores by aggregate normalized change; writes `core_ranking.csv` and
/// `core_ranking.json` into `out_dir`.
pub fn cmd_report_cores(log_path: &Path, out_dir: &Path) -> Result<Vec<RankedCore>, PipelineError> {
    let log = CoreChangeLog::read_csv(BufReader::new(File::open(log_path)?))?;
    if log.num_cores() == 0 {
        return Err(PipelineError::Data(format!("{}: empty core-change log", log_path.display())));
    }
    let ranking = modal_ranking(&log);
    std::fs::create_dir_all(out_dir)?;
    let mut csv = BufWriter::new(File::create(out_dir.join("core_ranking.csv"))?);
    writeln!(csv, "rank,core,aggregate_change,mode")?;
    for (k, r) in ranking.iter().enumerate() {
        writeln!(csv, "{},{},{:e},\"{}\"", k + 1, r.core, r.aggregate_change, r.mode)?;
    }
    csv.flush()?;
    let summary = RankingJson {
        num_cores: log.num_cores(),
        epochs_logged: log.values().first().map_or(0, Vec::len),
        ranking: &ranking,
    };
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    std::fs::write(out_dir.join("core_ranking.json"), json)?;
    Ok(ranking)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecomposeReport {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub tt_params: usize,
    pub dense_params: usize,
    pub relative_error: f64,
}

/// TT-SVD of the first tensor in a text tensor file; writes the cores in
/// `tt-vector` format to `output`.
pub fn cmd_decompose(input: &Path, output: &Path, truncation: &Truncation) -> Result<DecomposeReport, PipelineError> {
    let (_, tensor) = TextReader::new(BufReader::new(File::open(input)?)).read_tensor()?;
    let result = tt::tt_svd_detailed(&tensor, truncation)?;
    let norm = tensor.frobenius_norm();
    let report = DecomposeReport {
        dims: tensor.dims().to_vec(),
        ranks: result.tt.ranks().to_vec(),
        tt_params: result.tt.param_count(),
        dense_params: tensor.len(),
        relative_error: if norm > 0.0 { result.error() / norm } else { 0.0 },
    };
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = BufWriter::new(File::create(output)?);
    textio::write_tt_vector(&mut out, &result.tt)?;
    out.flush()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path) -> RunConfig {
        let mut c = RunConfig::default();
        c.apply_text(
            "synth_days = 90\ncomponents = 2\ntarget = CADUSD\nhidden_dims = 2,2,2,2,2\nranks = 2\n\
             epochs = 2\nseq_len = 3\nbatch_size = 8\nlearning_rate = 0.01\nsplit = 0.8\n",
        )
        .unwrap();
        c.output = dir.to_path_buf();
        c
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes: Vec<i32> = [
            PipelineError::Config(String::new()),
            PipelineError::Data(String::new()),
            PipelineError::Shape(String::new()),
            PipelineError::Io(std::io::Error::other("x")),
            PipelineError::Other(String::new()),
        ]
        .iter()
        .map(PipelineError::exit_code)
        .collect();
        assert_eq!(codes, vec![2, 3, 4, 5, 1]);
    }

    #[test]
    fn default_parameter_report() {
        let p = ParameterReport::for_config(&RunConfig::default()).unwrap();
        assert_eq!((p.tt_params, p.dense_params), (2016, 491_520));
        assert_eq!(format!("{:.1}", p.compression), "243.8");
    }

    #[test]
    fn zero_model_backtest_is_flat() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let ck = Checkpoint {
            seed: 0,
            epochs: 0,
            model: neural::TtRnn::zeros(&cfg.model_shape()).unwrap(),
        };
        let path = dir.path().join("zero.txt");
        ck.save(&path).unwrap();
        let rep = cmd_backtest(&cfg, &path).unwrap();
        assert!(rep.daily_positions.iter().all(|&p| p == 0.0));
        assert!(rep.strategy.cumulative_profit.iter().all(|&c| c == 0.0));
        assert!(rep.strategy.sharpe.is_none());
    }

    #[test]
    fn mismatched_dims_are_shape_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.set("in_dims", "2,2,5,3,4").unwrap();
        let err = cmd_train(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 4, "{err}");
    }

    #[test]
    fn missing_manifest_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.data = DataSource::Manifest(dir.path().join("missing.csv"));
        assert_eq!(cmd_train(&cfg).unwrap_err().exit_code(), 3);
    }
}
