//! Sequential vs data-parallel execution of the two hot loops: mini-batch
//! gradients and feature assembly. Both modes produce identical results, so
//! only wall time differs.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ttrnn_core::features::synth::{synth_panel, SynthConfig};
use ttrnn_core::features::{assemble, assemble_with};
use ttrnn_core::neural::{batch_gradients, init_model, ModelShape};
use ttrnn_core::{rng, Execution};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn gradients(c: &mut Criterion) {
    let panel = synth_panel(&SynthConfig {
        days: 200,
        signal_strength: 1.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let feats = assemble(&panel, "JPYUSD", 0.9).unwrap();
    let (train, _) = feats.datasets(10).unwrap();
    let batch: Vec<usize> = (0..66.min(train.len())).collect();
    let mut group = c.benchmark_group("batch_gradients");
    group.sample_size(10);
    for rank in [2, 6] {
        let shape = ModelShape::uniform(vec![2, 2, 5, 6, 4], vec![4, 4, 4, 4, 4], rank);
        let model = init_model(&shape, &mut rng::stream(0, "init")).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, format!("rank{rank}")), &exec, |b, &exec| {
                b.iter(|| batch_gradients(black_box(&model), &train, &batch, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn features(c: &mut Criterion) {
    let panel = synth_panel(&SynthConfig {
        days: 1000,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut group = c.benchmark_group("assemble");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| assemble_with(black_box(&panel), "JPYUSD", 0.9, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gradients, features);
criterion_main!(benches);
