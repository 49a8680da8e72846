//! Batch work through the rayon path against the sequential loop.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smoothprior::gaussian::{denoise_gaussian, quadratic_moments};
use smoothprior::graph::build_grid_graph;
use smoothprior::par::{map_range, map_range_seq};
use smoothprior::rng::stream;
use smoothprior::Graph;

fn signals(graph: &Graph, count: usize) -> Vec<Vec<f64>> {
    use rand::Rng;
    (0..count)
        .map(|s| {
            let mut r = stream(7, &[s as u64]);
            (0..graph.n()).map(|_| r.random::<f64>()).collect()
        })
        .collect()
}

fn batch_denoise(c: &mut Criterion) {
    let graph = build_grid_graph(64, 64).unwrap();
    let batch = signals(&graph, 32);
    let mut group = c.benchmark_group("denoise_gaussian_x32_64x64");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| map_range(batch.len(), |i| denoise_gaussian(black_box(&batch[i]), &graph, 2.0).unwrap().iterations))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| map_range_seq(batch.len(), |i| denoise_gaussian(black_box(&batch[i]), &graph, 2.0).unwrap().iterations))
    });
    group.finish();
}

fn batch_moments(c: &mut Criterion) {
    let mut group = c.benchmark_group("quadratic_moments");
    for side in [32usize, 128] {
        let graph = build_grid_graph(side, side).unwrap();
        let batch = signals(&graph, 256);
        group.bench_with_input(BenchmarkId::new("parallel", side), &side, |b, _| {
            b.iter(|| map_range(batch.len(), |i| quadratic_moments(&batch[i], &graph).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("sequential", side), &side, |b, _| {
            b.iter(|| map_range_seq(batch.len(), |i| quadratic_moments(&batch[i], &graph).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, batch_denoise, batch_moments);
criterion_main!(benches);
