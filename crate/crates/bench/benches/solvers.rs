use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ksim_bench::{grid, seed, tuple};
use ksim_core::calculus::{laplacian, rough_laplacian_symtf};
use ksim_core::chardata::{build_char_data, CharDataOptions};
use ksim_core::constraint::{picard_regular_tuple, PicardOptions};
use ksim_core::linalg::SolveOptions;
use ksim_core::random::{random_scalar, random_symtf, rng};
use ksim_core::transport::{solve_kappa_singular, KappaOp, KappaSingularProblem};

fn calculus(c: &mut Criterion) {
    let mut group = c.benchmark_group("calculus");
    for (n, m) in [(24, 48), (48, 96)] {
        let g = grid(n, m);
        let mut r = rng(1);
        let u = random_scalar(&g, &mut r, 0, 8);
        let f = random_symtf(&g, &mut r, 8);
        group.bench_with_input(BenchmarkId::new("laplacian", format!("{n}x{m}")), &u, |b, u| b.iter(|| laplacian(black_box(u))));
        group.bench_with_input(BenchmarkId::new("rough_laplacian_symtf", format!("{n}x{m}")), &f, |b, f| {
            b.iter(|| rough_laplacian_symtf(black_box(f)))
        });
    }
    group.finish();
}

fn constraint(c: &mut Criterion) {
    let mut group = c.benchmark_group("constraint");
    group.sample_size(10);
    for (n, m) in [(24, 48), (48, 96)] {
        let g = grid(n, m);
        let s = seed(&g, 4e-3);
        group.bench_function(BenchmarkId::new("picard", format!("{n}x{m}")), |b| {
            b.iter(|| picard_regular_tuple(black_box(&s), &PicardOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn kappa_singular(c: &mut Criterion) {
    let g = grid(24, 48);
    let (_, t) = tuple(&g, 4e-3);
    let f = random_symtf(&g, &mut rng(3), 6);
    let h = KappaOp::new(&t, false, 0.0).apply_field(&f);
    let p = KappaSingularProblem { tuple: t, h, include_lapse_term: false };
    let so = SolveOptions::default();
    let mut group = c.benchmark_group("transport");
    group.sample_size(10);
    group.bench_function("kappa_singular_24x48", |b| b.iter(|| solve_kappa_singular(black_box(&p), &so).unwrap()));
    group.finish();
}

fn chardata(c: &mut Criterion) {
    let g = grid(16, 32);
    let (_, t) = tuple(&g, 4e-3);
    let mut group = c.benchmark_group("chardata");
    group.sample_size(10);
    group.bench_function("bundle_16x32", |b| b.iter(|| build_char_data(black_box(&t), &CharDataOptions::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, calculus, constraint, kappa_singular, chardata);
criterion_main!(benches);
