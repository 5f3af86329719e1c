use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use spikeglass_core::{
    critical_beta, gamma, gauss_hermite, sup_big_gamma, GammaParams, Prior, SolverOptions,
};

fn bench_gamma(c: &mut Criterion) {
    let prior = Prior::rademacher();
    let params = GammaParams::new(3).unwrap();
    let rule = gauss_hermite(101).unwrap();
    c.bench_function("gamma_rademacher_p3", |bench| {
        bench.iter(|| gamma(&prior, &params, 1.0, 0.5, &rule).unwrap())
    });

    let sparse = Prior::sparse_rademacher(0.3).unwrap();
    c.bench_function("gamma_sparse_p3", |bench| {
        bench.iter(|| gamma(&sparse, &params, 1.0, 0.5, &rule).unwrap())
    });
}

fn bench_sup_big_gamma(c: &mut Criterion) {
    let prior = Prior::rademacher();
    let params = GammaParams::new(3).unwrap();
    let rule = gauss_hermite(101).unwrap();
    let mut group = c.benchmark_group("sup_big_gamma");
    for &v_step in &[0.01, 0.001] {
        group.bench_with_input(BenchmarkId::from_parameter(v_step), &v_step, |bench, &step| {
            bench.iter(|| sup_big_gamma(&prior, &params, 1.0, step, &rule).unwrap())
        });
    }
    group.finish();
}

fn bench_critical_beta(c: &mut Criterion) {
    let prior = Prior::rademacher();
    let opts = SolverOptions {
        v_step: Some(0.01),
        b_tol: 1e-3,
        ..SolverOptions::default()
    };
    let mut group = c.benchmark_group("critical_beta");
    group.sample_size(10);
    group.bench_function("rademacher_p3_coarse", |bench| {
        bench.iter(|| critical_beta(&prior, 3, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_gamma, bench_sup_big_gamma, bench_critical_beta);
criterion_main!(benches);
