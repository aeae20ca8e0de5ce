use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mixlog_bench::{shear, triple};
use mixlog_core::advection::step;
use mixlog_core::dcommutator::{trilinear_fourier, trilinear_pv};
use mixlog_core::functionals::{v_functional, v_physical};
use mixlog_core::{Constants, Grid, ScalarField};
use std::hint::black_box;

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum");
    for n in [64, 256] {
        let (f, _, _) = triple(n, 0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| black_box(f.spectrum())));
    }
    group.finish();
}

fn functionals(c: &mut Criterion) {
    let (f, _, _) = triple(256, 1);
    c.bench_function("v_functional/256", |b| b.iter(|| v_functional(black_box(&f))));
    let consts = Constants::new(1).expect("d = 1");
    let gauss = ScalarField::from_fn(Grid::boxed(1, 512, 8.0).expect("grid"), |x| (-std::f64::consts::PI * x[0] * x[0]).exp());
    c.bench_function("v_physical/d1_512", |b| b.iter(|| v_physical(black_box(&gauss), &consts)));
}

fn trilinear(c: &mut Criterion) {
    let (f, g, v) = triple(128, 2);
    c.bench_function("trilinear_fourier/128", |b| b.iter(|| trilinear_fourier(black_box(&f), &g, &v)));
    let (f, g, v) = triple(32, 3);
    let mut group = c.benchmark_group("trilinear_pv");
    group.sample_size(10);
    group.bench_function("32", |b| b.iter(|| trilinear_pv(black_box(&f), &g, &v)));
    group.finish();
}

fn rk4(c: &mut Criterion) {
    let (theta, _, _) = triple(256, 4);
    let u = shear(*theta.grid());
    c.bench_function("rk4_step/256", |b| b.iter(|| step(black_box(&theta), &u, 1e-3)));
}

criterion_group!(benches, spectra, functionals, trilinear, rk4);
criterion_main!(benches);
