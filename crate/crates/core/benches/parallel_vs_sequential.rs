//! Compares the rayon-backed level sweeps against single-threaded execution.
//!
//! The sequential baseline is the same code pinned to a one-thread pool, so
//! the comparison isolates the parallel speedup; building with
//! `--no-default-features` removes rayon entirely and takes the plain-loop
//! fallback instead.

use cantor_core::measures::{metric_dn, CylinderAssignment, ExtensionPolicy, MeasureOracle};
use cantor_core::rational::DyadicRational;
use cantor_core::transforms::rationalize;
use criterion::{criterion_group, criterion_main, Criterion};

fn bernoulli_quarter() -> MeasureOracle {
    let p: DyadicRational = "1/4".parse().unwrap();
    MeasureOracle::bernoulli(p).unwrap()
}

fn single_thread_pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
}

fn bench_metric_dn(c: &mut Criterion) {
    let mu = MeasureOracle::lebesgue();
    let nu = bernoulli_quarter();
    let mut group = c.benchmark_group("metric_dn_level_14");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| metric_dn(&mu, &nu, 14).unwrap())
    });
    let pool = single_thread_pool();
    group.bench_function("sequential", |b| {
        b.iter(|| pool.install(|| metric_dn(&mu, &nu, 14).unwrap()))
    });
    group.finish();
}

fn bench_truncate(c: &mut Criterion) {
    let nu = bernoulli_quarter();
    let mut group = c.benchmark_group("truncate_depth_14");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| CylinderAssignment::truncate(&nu, 14, ExtensionPolicy::Uniform).unwrap())
    });
    let pool = single_thread_pool();
    group.bench_function("sequential", |b| {
        b.iter(|| {
            pool.install(|| CylinderAssignment::truncate(&nu, 14, ExtensionPolicy::Uniform).unwrap())
        })
    });
    group.finish();
}

fn bench_rationalize(c: &mut Criterion) {
    let nu = bernoulli_quarter();
    let mut group = c.benchmark_group("rationalize_depth_12");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| rationalize(&nu, 12).unwrap()));
    let pool = single_thread_pool();
    group.bench_function("sequential", |b| {
        b.iter(|| pool.install(|| rationalize(&nu, 12).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_metric_dn, bench_truncate, bench_rationalize);
criterion_main!(benches);
