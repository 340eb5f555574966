use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use plcp_core::analytics::{laplace_functional_radial, nn_cdf, RadialFunction};
use plcp_core::sampler::{sample_palm, sample_stationary, SeedSpec};
use plcp_core::tessellation::{build_voronoi, typical_cell_extent};
use plcp_core::{ModelParams, QuadratureSpec};
use std::hint::black_box;

fn sampling(c: &mut Criterion) {
    let params = ModelParams::isotropic(1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("sample_stationary");
    for radius in [5.0, 20.0] {
        group.bench_with_input(BenchmarkId::from_parameter(radius), &radius, |b, &r| {
            let mut i = 0;
            b.iter(|| {
                i += 1;
                sample_stationary(&params, r, 1.0, SeedSpec::new(1, i)).unwrap()
            })
        });
    }
    group.finish();
}

fn analytics(c: &mut Criterion) {
    let params = ModelParams::isotropic(1.0, 1.0).unwrap();
    let quad = QuadratureSpec::default();
    c.bench_function("nn_cdf r=1", |b| {
        b.iter(|| nn_cdf(black_box(1.0), &params, &quad).unwrap())
    });
    let f = RadialFunction::path_loss(1.0, 4.0, 0.1).unwrap();
    c.bench_function("laplace radial path loss", |b| {
        b.iter(|| laplace_functional_radial(black_box(&f), &params, &quad).unwrap())
    });
}

fn tessellation(c: &mut Criterion) {
    let params = ModelParams::isotropic(1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("voronoi");
    for radius in [10.0, 30.0] {
        let real = sample_stationary(&params, radius, 0.0, SeedSpec::new(2, 0)).unwrap();
        group.bench_with_input(BenchmarkId::new("points", real.points.len()), &real, |b, real| {
            b.iter(|| build_voronoi(real).unwrap())
        });
    }
    group.finish();

    let dense = ModelParams::isotropic(1.0, 100.0).unwrap();
    let real = sample_palm(&dense, 8.0, 0.0, SeedSpec::new(3, 0)).unwrap();
    c.bench_function("typical cell mu=100", |b| {
        b.iter(|| typical_cell_extent(black_box(&real)).unwrap())
    });
}

criterion_group!(benches, sampling, analytics, tessellation);
criterion_main!(benches);
