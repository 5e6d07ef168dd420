use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use routeconf::{eer_threshold, CentroidMode, CentroidModel, Router, Vocabulary};
use routeconf_bench::{reliability_samples, Fixture};

fn vectorize(c: &mut Criterion) {
    let fx = Fixture::synthetic(3, 3, 50, 0.3);
    let vocab = Vocabulary::build(&fx.docs).unwrap();
    c.bench_function("vectorize/1350-docs", |b| {
        b.iter(|| {
            fx.docs
                .iter()
                .map(|d| vocab.vectorize(black_box(d)).len())
                .sum::<usize>()
        })
    });
}

fn train(c: &mut Criterion) {
    let fx = Fixture::synthetic(3, 3, 50, 0.3);
    let vocab = Vocabulary::build(&fx.docs).unwrap();
    c.bench_function("train/positive-only", |b| {
        b.iter_batched(
            || vocab.clone(),
            |v| {
                CentroidModel::train(&fx.docs, &fx.taxonomy, v, CentroidMode::PositiveOnly, None)
                    .unwrap()
            },
            BatchSize::SmallInput,
        )
    });
    c.bench_function("pipeline/train-and-calibrate", |b| b.iter(|| fx.train()));
}

fn decode(c: &mut Criterion) {
    let fx = Fixture::synthetic(2, 10, 20, 0.3);
    let trained = fx.train();
    let router = Router::new(&trained.model, &fx.taxonomy).unwrap();
    let vectors: Vec<_> = trained
        .split
        .test
        .iter()
        .map(|d| trained.model.vectorize(d))
        .collect();
    c.bench_function("decode/100-leaves", |b| {
        b.iter(|| {
            vectors
                .iter()
                .map(|v| router.decode(black_box(v)).steps.len())
                .sum::<usize>()
        })
    });
}

fn eer(c: &mut Criterion) {
    let samples = reliability_samples(10_000, 7);
    c.bench_function("eer_threshold/10k", |b| {
        b.iter(|| eer_threshold(black_box(&samples)).unwrap())
    });
}

criterion_group!(benches, vectorize, train, decode, eer);
criterion_main!(benches);
