use criterion::{criterion_group, criterion_main, Criterion};
use ratiosense_core::estimators::{exact_outcome_stats, ghz_probabilities};
use ratiosense_core::exactsim::{build_state, evolve};
use ratiosense_core::noise::{kappa_quadrature, short_time_coefficients};
use ratiosense_core::optimize::{f_n_direct, f_n_polygamma};
use ratiosense_core::specfun::polygamma;
use ratiosense_core::{ComplexValue, EstimatorKind, LatticeGeometry, NoiseParams, StateKind};
use std::hint::black_box;

fn special_functions(c: &mut Criterion) {
    let z = ComplexValue::new(1.7, 23.0);
    c.bench_function("polygamma_m3", |b| b.iter(|| polygamma(3, black_box(z))));
    let p = NoiseParams::default();
    c.bench_function("f_n_direct_n1000", |b| b.iter(|| f_n_direct(1000, black_box(0.43), &p)));
    c.bench_function("f_n_polygamma_n1000", |b| {
        b.iter(|| f_n_polygamma(1000, black_box(0.43), &p))
    });
}

fn quadrature(c: &mut Criterion) {
    let p = NoiseParams::default();
    c.bench_function("kappa_quadrature", |b| {
        b.iter(|| kappa_quadrature(black_box(0.05), black_box(1.3), &p))
    });
}

fn enumeration(c: &mut Criterion) {
    let (n, tau, nu) = (100usize, 1e-3, 400u64);
    let probs = ghz_probabilities(n, 6.0, tau, 0.3).unwrap();
    let mut g = c.benchmark_group("exact_outcome_stats");
    g.sample_size(10);
    g.bench_function("standard_nu400", |b| {
        b.iter(|| exact_outcome_stats(EstimatorKind::Standard { gamma_assumed: 0.0 }, probs, nu, n, tau))
    });
    g.bench_function("ratio_nu400", |b| {
        b.iter(|| exact_outcome_stats(EstimatorKind::Ratio, probs, nu, n, tau))
    });
    g.finish();
}

fn density_matrix(c: &mut Criterion) {
    let n = 8;
    let p = NoiseParams::default();
    let rho = build_state(StateKind::CssX, n).unwrap();
    let coeffs = short_time_coefficients(0.05, &LatticeGeometry::new(n, 0.5).unwrap(), &p);
    c.bench_function("evolve_n8", |b| b.iter(|| evolve(&rho, black_box(3.0), 0.05, &coeffs)));
}

criterion_group!(benches, special_functions, quadrature, enumeration, density_matrix);
criterion_main!(benches);
