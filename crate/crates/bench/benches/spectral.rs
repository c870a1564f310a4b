use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fnls_bench::smooth_field;
use fnls_core::norms::{certified_infimum, sobolev_norm_derivative_sum, sobolev_norm_spectral};
use fnls_core::spectral::{forward_transform, free_propagator, inverse_transform};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for (dim, m) in [(1, 256), (1, 4096), (2, 64), (3, 16)] {
        let f = smooth_field(dim, m);
        let p = inverse_transform(&f);
        group.bench_with_input(BenchmarkId::new("inverse", format!("{dim}d_{m}")), &f, |b, f| {
            b.iter(|| inverse_transform(black_box(f)))
        });
        group.bench_with_input(BenchmarkId::new("forward", format!("{dim}d_{m}")), &p, |b, p| {
            b.iter(|| forward_transform(black_box(p)))
        });
    }
    group.finish();
}

fn multipliers_and_norms(c: &mut Criterion) {
    let f = smooth_field(2, 64);
    c.bench_function("free_propagator_2d_64", |b| b.iter(|| free_propagator(black_box(&f), 1.5, 0.1)));
    c.bench_function("sobolev_spectral_2d_64", |b| b.iter(|| sobolev_norm_spectral(black_box(&f), 2.0)));
    c.bench_function("sobolev_derivative_sum_2d_64", |b| {
        b.iter(|| sobolev_norm_derivative_sum(black_box(&f), 2))
    });
    c.bench_function("certified_infimum_2d_64", |b| b.iter(|| certified_infimum(black_box(&f), 4).unwrap()));
}

criterion_group!(benches, transforms, multipliers_and_norms);
criterion_main!(benches);
