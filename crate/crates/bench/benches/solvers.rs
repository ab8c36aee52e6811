use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kspart_core::generate::random_tight;
use kspart_core::pipeline::{convex_combination_subset, scalar_target_subset};
use kspart_core::solvers::{best_subset_oracle, two_partition};
use kspart_core::{CoefficientVector, HermitianMatrix, SolverConfig};

fn exhaustive_split(c: &mut Criterion) {
    let mut group = c.benchmark_group("two_partition_exhaustive");
    for m in [8usize, 12, 16] {
        let frame = random_tight(2, m, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &frame, |b, f| {
            b.iter(|| two_partition(black_box(f), &SolverConfig::exhaustive()).unwrap())
        });
    }
    group.finish();
}

fn local_split(c: &mut Criterion) {
    let mut group = c.benchmark_group("two_partition_local");
    for m in [16usize, 32, 64] {
        let frame = random_tight(3, m, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &frame, |b, f| {
            b.iter(|| two_partition(black_box(f), &SolverConfig::local(0)).unwrap())
        });
    }
    group.finish();
}

fn subset_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("subset_oracle");
    for m in [10usize, 14, 18] {
        let frame = random_tight(2, m, 3).unwrap();
        let target = HermitianMatrix::identity(2).scale(0.3);
        group.bench_with_input(BenchmarkId::from_parameter(m), &frame, |b, f| {
            b.iter(|| best_subset_oracle(black_box(f), &target).unwrap())
        });
    }
    group.finish();
}

fn pipelines(c: &mut Criterion) {
    let frame = random_tight(2, 14, 4).unwrap();
    let coeffs = CoefficientVector::new((0..14).map(|i| (i as f64 * 0.37).fract()).collect()).unwrap();
    let cfg = SolverConfig::exhaustive();
    c.bench_function("scalar_pipeline_m14", |b| b.iter(|| scalar_target_subset(black_box(&frame), 0.3, &cfg).unwrap()));
    c.bench_function("coefficient_pipeline_m14", |b| {
        b.iter(|| convex_combination_subset(black_box(&frame), &coeffs, &cfg).unwrap())
    });
}

criterion_group!(benches, exhaustive_split, local_split, subset_oracle, pipelines);
criterion_main!(benches);
