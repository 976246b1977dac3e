//! Parallel vs sequential comparison of the data-parallel sweeps.
//!
//! The library fans its exhaustive verifications out over rayon when built
//! with the default `parallel` feature; `run_sequential` pins the same code
//! to one thread, so each group benches both paths from one binary. Without
//! the feature the two arms coincide (sequential fallback).

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use tribuilding::run_sequential;
use tribuilding::subshift::matrices;
use tribuilding::verify;
use tribuilding::words::ball;
use tribuilding::Presentation;

fn bench_ball(c: &mut Criterion) {
    let pres = Presentation::canonical_q2();
    let mut group = c.benchmark_group("ball_census_r3");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(ball(&pres, 3, None).unwrap().sphere_size(3)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_sequential(|| black_box(ball(&pres, 3, None).unwrap().sphere_size(3))))
    });
    group.finish();
}

fn bench_matrices(c: &mut Criterion) {
    let pres = Presentation::canonical_q2();
    let mut group = c.benchmark_group("transition_matrices");
    group.sample_size(30);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(matrices(&pres).0.row_sum(0)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_sequential(|| black_box(matrices(&pres).0.row_sum(0))))
    });
    group.finish();
}

fn bench_row_oracle_sweep(c: &mut Criterion) {
    let pres = Presentation::canonical_q2();
    let mut group = c.benchmark_group("row_oracle_sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(verify::transition_rows(&pres).passed))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_sequential(|| black_box(verify::transition_rows(&pres).passed)))
    });
    group.finish();
}

fn bench_wall_sweep(c: &mut Criterion) {
    let pres = Presentation::canonical_q2();
    let mut group = c.benchmark_group("wall_extension_sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(verify::wall_extensions(&pres).passed))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| run_sequential(|| black_box(verify::wall_extensions(&pres).passed)))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_ball,
    bench_matrices,
    bench_row_oracle_sweep,
    bench_wall_sweep
);
criterion_main!(benches);
