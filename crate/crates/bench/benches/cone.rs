use std::hint::black_box;

use copocone::{
    dist_to_copositive, eigendecompose, is_copositive, multistart_max_angle, psi_search, SearchConfig,
};
use copocone_bench::unit_batch;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigendecompose");
    for n in [3, 4, 6] {
        let batch = unit_batch(n, 64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &batch, |b, batch| {
            b.iter(|| batch.iter().map(|m| eigendecompose(black_box(m)).unwrap().min()).sum::<f64>())
        });
    }
    g.finish();
}

fn exact_test(c: &mut Criterion) {
    let batch = unit_batch(3, 256);
    c.bench_function("is_copositive/3", |b| {
        b.iter(|| batch.iter().filter(|m| is_copositive(black_box(m), 1e-10).unwrap().member).count())
    });
}

fn distance(c: &mut Criterion) {
    let mut g = c.benchmark_group("dist_to_copositive");
    for n in [3, 4] {
        let batch = unit_batch(n, 16);
        g.bench_with_input(BenchmarkId::from_parameter(n), &batch, |b, batch| {
            b.iter(|| {
                batch
                    .iter()
                    .map(|m| dist_to_copositive(black_box(m), 1e-12, 100_000).unwrap().distance)
                    .sum::<f64>()
            })
        });
    }
    g.finish();
}

fn searches(c: &mut Criterion) {
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("theta3/8 starts", |b| {
        b.iter(|| multistart_max_angle(black_box(&SearchConfig::new(3, 8, 42))).unwrap().best_angle)
    });
    g.bench_function("psi5/8 starts", |b| {
        b.iter(|| psi_search(5, black_box(&SearchConfig::new(5, 8, 42))).unwrap().best_angle)
    });
    g.finish();
}

criterion_group!(benches, eigen, exact_test, distance, searches);
criterion_main!(benches);
