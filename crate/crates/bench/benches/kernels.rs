use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use membrane_bench::{supercritical, wavy_field};
use membrane_core::clement::{build_triangulation, kernel_decomposition_check, TorusField};
use membrane_core::constructions::udelta_profile;
use membrane_core::grid::{forward_transform, project_euclidean};
use membrane_core::minimizer::{minimize, MinimizeOptions};
use membrane_core::seminorm::seminorm_double_integral_periodic;
use membrane_core::{builtin_well, ReducedFunctional};

fn spectral(c: &mut Criterion) {
    let w = builtin_well("quartic").unwrap();
    let p = supercritical();
    let mut g = c.benchmark_group("spectral");
    for n in [256usize, 1024, 4096] {
        let u = wavy_field(n);
        let f = ReducedFunctional::new(n, &p, &w).unwrap();
        g.bench_with_input(BenchmarkId::new("fft", n), &u, |b, u| {
            b.iter(|| forward_transform(black_box(u)))
        });
        g.bench_with_input(BenchmarkId::new("energy_and_gradient", n), &u, |b, u| {
            b.iter(|| f.energy_and_gradient(black_box(u.values())))
        });
        let shifted = u.map(|x| 1.7 * x + 0.2);
        g.bench_with_input(BenchmarkId::new("projection", n), &shifted, |b, v| {
            b.iter(|| project_euclidean(black_box(v)).unwrap())
        });
    }
    g.finish();
}

fn seminorm(c: &mut Criterion) {
    let mut g = c.benchmark_group("seminorm");
    for n in [1024usize, 8192] {
        let u = wavy_field(n);
        g.bench_with_input(BenchmarkId::new("double_integral_half", n), &u, |b, u| {
            b.iter(|| seminorm_double_integral_periodic(black_box(u), 0.5).unwrap())
        });
    }
    g.finish();
}

fn clement(c: &mut Criterion) {
    let mut g = c.benchmark_group("clement");
    g.sample_size(10);
    let u = TorusField::profile(udelta_profile(0.01));
    let tri = build_triangulation(1, 16).unwrap();
    g.bench_function("kernel_split_1d", |b| {
        b.iter(|| kernel_decomposition_check(black_box(&u), &tri, 8.0).unwrap())
    });
    g.finish();
}

fn minimizer(c: &mut Criterion) {
    let w = builtin_well("quartic").unwrap();
    let p = supercritical();
    let opts = MinimizeOptions::standard(&p, &w, 256, 0, 1).unwrap();
    let mut g = c.benchmark_group("minimizer");
    g.sample_size(10);
    g.bench_function("multi_start_256", |b| {
        b.iter(|| minimize(black_box(&p), &w, &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, spectral, seminorm, clement, minimizer);
criterion_main!(benches);
