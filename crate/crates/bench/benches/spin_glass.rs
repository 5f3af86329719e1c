use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use spikeglass_core::{
    estimate_tv, free_energy_exact, metropolis_chain, sample_disorder, Prior,
};

fn bench_free_energy(c: &mut Criterion) {
    let priors = [Prior::rademacher()];
    let mut group = c.benchmark_group("free_energy_exact");
    group.sample_size(10);
    for &n in &[8usize, 10, 12] {
        let d = sample_disorder(n, 3, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &d, |bench, d| {
            bench.iter(|| free_energy_exact(d, &priors, &[0.5]).unwrap())
        });
    }
    group.finish();
}

fn bench_metropolis(c: &mut Criterion) {
    let priors = [Prior::rademacher()];
    let d = sample_disorder(16, 3, 1).unwrap();
    c.bench_function("metropolis_100_sweeps_n16_p3", |bench| {
        bench.iter(|| {
            metropolis_chain(&d, &priors, &[1.0], 101, 100, 7)
                .unwrap()
                .count()
        })
    });
}

fn bench_tv(c: &mut Criterion) {
    let priors = [Prior::rademacher()];
    let mut group = c.benchmark_group("estimate_tv_20_replicas");
    group.sample_size(10);
    group.bench_function("n10_p3", |bench| {
        bench.iter(|| estimate_tv(10, 3, &priors, &[1.0], 20, 3).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_free_energy, bench_metropolis, bench_tv);
criterion_main!(benches);
