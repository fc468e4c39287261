use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hyperrad::radiation::{energy_density, eta_window, total_energy_on_grid, Route};
use hyperrad::specfun::{incomplete_macdonald, k0_series, MacdonaldOptions, Method};
use hyperrad::{derive_constants, Interval, KGrid, QuadSpec, SourceConfig, UnitSystem, WaveVector};
use std::hint::black_box;

fn macdonald(c: &mut Criterion) {
    let spec = QuadSpec::with_tol(1e-14, 1e-10);
    let window = Interval::finite(-0.8, 1.3).unwrap();
    let mut g = c.benchmark_group("incomplete_macdonald");
    for (name, method) in [("direct", Method::Direct), ("contour", Method::Contour), ("series", Method::Series)] {
        let opts = MacdonaldOptions { method, ..Default::default() };
        g.bench_with_input(BenchmarkId::new(name, "nu=0.7,z=0.9"), &opts, |b, o| {
            b.iter(|| incomplete_macdonald(black_box(0.7), black_box(0.9), &window, o, &spec).unwrap())
        });
    }
    g.bench_function("k0_series", |b| b.iter(|| k0_series(black_box(0.5), -0.8, 1.3).unwrap()));
    g.finish();
}

fn densities(c: &mut Criterion) {
    let u = UnitSystem::default();
    let d = derive_constants(&SourceConfig::at_rest_with_scale(1.0, 1.0, &u).with_u_perp(0.4, 0.1), &u).unwrap();
    let spec = QuadSpec::with_tol(1e-14, 1e-10);
    let window = eta_window(-0.5, 0.9).unwrap();
    let k = WaveVector::new(1.2, -0.7, 2.1);
    let mut g = c.benchmark_group("energy_density");
    for (name, route) in [("rapidity", Route::Rapidity), ("reduced", Route::Reduced), ("direct", Route::Direct)] {
        g.bench_function(name, |b| b.iter(|| energy_density(&d, black_box(&k), &window, route, &spec).unwrap()));
    }
    g.finish();

    let parallel = derive_constants(&SourceConfig::at_rest_with_scale(1.0, 1.0, &u), &u).unwrap();
    let grid = KGrid::cylindrical(4.0, 4.0, 4, 8);
    let mut g = c.benchmark_group("total_energy");
    g.sample_size(10);
    g.bench_function("parallel_grid_4x8", |b| {
        b.iter(|| total_energy_on_grid(&parallel, &window, &grid, Route::Rapidity, &spec).unwrap())
    });
    g.finish();
}

criterion_group!(benches, macdonald, densities);
criterion_main!(benches);
