//! Parallel vs sequential sweeps over the sample-based verification suites.
//! With the default `parallel` feature both modes are real; without it the
//! Parallel rows degrade to sequential and the comparison collapses.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use bracketmin::exec::ExecMode;
use bracketmin::verify;

fn bench_property_star(c: &mut Criterion) {
    let mut group = c.benchmark_group("property_star_n5_200");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let r = verify::property_star_suite(5, 200, 42, ExecMode::Parallel).unwrap();
            black_box(r.min_gap)
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let r = verify::property_star_suite(5, 200, 42, ExecMode::Sequential).unwrap();
            black_box(r.min_gap)
        })
    });
    group.finish();
}

fn bench_lemma7_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("lemma7_batch_n6_100");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let r = verify::lemma7_batch(6, 100, 7, ExecMode::Parallel).unwrap();
            black_box(r.0)
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let r = verify::lemma7_batch(6, 100, 7, ExecMode::Sequential).unwrap();
            black_box(r.0)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_property_star, bench_lemma7_batch);
criterion_main!(benches);
