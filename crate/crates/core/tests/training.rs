use std::path::Path;

use ttrnn_core::neural::{batch_gradients, init_model, train, ModelShape, SequenceDataset, TrainConfig};
use ttrnn_core::pipeline::{self, Checkpoint, RunConfig};
use ttrnn_core::textio::write_tensor;
use ttrnn_core::{rng, DenseTensor, Execution};

fn small_config(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.apply_text(
        "synth_days = 160\nsynth_signal = 1\nhidden_dims = 2,2,2,2,2\nranks = 2\nepochs = 3\n\
         seq_len = 4\nbatch_size = 16\nlearning_rate = 0.02\n",
    )
    .unwrap();
    cfg.output = dir.to_path_buf();
    cfg
}

fn toy_dataset() -> SequenceDataset {
    let panel = ttrnn_core::features::synth::synth_panel(&ttrnn_core::features::synth::SynthConfig {
        days: 120,
        signal_strength: 1.0,
        ..Default::default()
    })
    .unwrap();
    let feats = ttrnn_core::features::assemble(&panel, "JPYUSD", 0.8).unwrap();
    feats.datasets(4).unwrap().0
}

#[test]
fn batch_gradient_is_identical_across_execution_modes() {
    let data = toy_dataset();
    let shape = ModelShape::uniform(vec![2, 2, 5, 6, 4], vec![2, 2, 2, 2, 2], 3);
    let model = init_model(&shape, &mut rng::stream(4, "init")).unwrap();
    let idx: Vec<usize> = (0..data.len()).collect();
    let (la, ga) = batch_gradients(&model, &data, &idx, Execution::Sequential).unwrap();
    let (lb, gb) = batch_gradients(&model, &data, &idx, Execution::Parallel).unwrap();
    assert_eq!(la.to_bits(), lb.to_bits());
    assert_eq!(ga, gb);
}

#[test]
fn training_lowers_the_training_loss() {
    let data = toy_dataset();
    let shape = ModelShape::uniform(vec![2, 2, 5, 6, 4], vec![2, 2, 2, 2, 2], 2);
    let model = init_model(&shape, &mut rng::stream(0, "init")).unwrap();
    let before = data.mean_loss(&model, Execution::default()).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.02,
        epochs: 5,
        batch_size: 8,
        seq_len: 4,
        ..TrainConfig::default()
    };
    let out = train(model, &data, &cfg).unwrap();
    assert_eq!(out.epoch_losses.len(), 5);
    assert_eq!(out.snapshots.len(), 5);
    assert_eq!(out.change_log.entry_count(), 5 * 4);
    assert!(*out.epoch_losses.last().unwrap() < before);
}

#[test]
fn end_to_end_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let report = pipeline::cmd_train(&cfg).unwrap();
    assert_eq!(report.epoch_losses.len(), 3);
    for f in [
        pipeline::CHECKPOINT_FILE,
        pipeline::TRAIN_LOG_FILE,
        pipeline::CORE_CHANGES_FILE,
        pipeline::RUN_MANIFEST_FILE,
        pipeline::RESOLVED_CONFIG_FILE,
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join(pipeline::RUN_MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 0);

    // the resolved config reproduces the run
    let resolved = RunConfig::from_file(&dir.path().join(pipeline::RESOLVED_CONFIG_FILE)).unwrap();
    assert_eq!(resolved, cfg);

    let ck = Checkpoint::load(&dir.path().join(pipeline::CHECKPOINT_FILE)).unwrap();
    assert_eq!(ck.epochs, 3);
    let bt = pipeline::cmd_backtest(&cfg, &dir.path().join(pipeline::CHECKPOINT_FILE)).unwrap();
    assert_eq!(bt.daily_positions.len(), report.test_samples);
    assert!(bt.daily_positions.iter().all(|p| (-1.0..=1.0).contains(p)));
    assert!(dir.path().join("backtest.json").is_file());
    assert!(dir.path().join("backtest.csv").is_file());

    let ranking = pipeline::cmd_report_cores(&dir.path().join(pipeline::CORE_CHANGES_FILE), dir.path()).unwrap();
    assert_eq!(ranking.len(), 5);
    let mut cores: Vec<usize> = ranking.iter().map(|r| r.core).collect();
    cores.sort();
    assert_eq!(cores, vec![1, 2, 3, 4, 5]);
}

#[test]
fn manifest_data_matches_in_memory_synth() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(&dir.path().join("synth"));
    let manifest = pipeline::cmd_synth(&cfg).unwrap();
    let (_, from_synth, _) = pipeline::load_features(&cfg).unwrap();
    cfg.set("data", manifest.to_str().unwrap()).unwrap();
    let (_, from_disk, hashes) = pipeline::load_features(&cfg).unwrap();
    assert_eq!(hashes.len(), 25);
    assert_eq!(from_synth.len(), from_disk.len());
    assert_eq!(from_synth.labels(), from_disk.labels());
    for k in 0..from_synth.len() {
        let (a, b) = (from_synth.z(k), from_disk.z(k));
        assert!(a.max_abs_diff(b) <= 1e-9 * (1.0 + a.frobenius_norm()));
    }
}

#[test]
fn decompose_reports_compression_and_error() {
    let dir = tempfile::tempdir().unwrap();
    let t = DenseTensor::from_fn(vec![4, 4, 4, 4], |i| ((i[0] * i[1]) as f64 + (i[2] + i[3]) as f64).sin()).unwrap();
    let input = dir.path().join("t.txt");
    let mut buf = Vec::new();
    write_tensor(&mut buf, "t", &t).unwrap();
    std::fs::write(&input, buf).unwrap();
    let full = pipeline::cmd_decompose(&input, &dir.path().join("full.txt"), &ttrnn_core::Truncation::Full).unwrap();
    assert!(full.relative_error < 1e-12);
    let capped =
        pipeline::cmd_decompose(&input, &dir.path().join("r2.txt"), &ttrnn_core::Truncation::MaxRank(2)).unwrap();
    assert!(capped.ranks.iter().all(|&r| r <= 2));
    assert!(capped.tt_params < full.tt_params);
    assert!(capped.relative_error >= full.relative_error);
}
