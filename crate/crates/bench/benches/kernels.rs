use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use wvpower::analytic::{expected_coleman, phi_z, ColemanCurveSpec};
use wvpower::experiments::{mc_coleman_curve, mc_power_curve, PowerStatistic};
use wvpower::games::{count_winning_mitm, count_winning_naive};
use wvpower::simplex::sample_uniform_simplex;
use wvpower::weightdist::ordered_weight_density;
use wvpower::{RandomSeed, VotingGame};

fn game(n: usize) -> VotingGame {
    let w = sample_uniform_simplex(n, RandomSeed::from(n as u64)).unwrap();
    VotingGame::new(w, 0.6).unwrap()
}

fn winning_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("winning-count");
    for n in [8, 12, 16, 20] {
        let g = game(n);
        group.bench_with_input(BenchmarkId::new("naive", n), &g, |b, g| {
            b.iter(|| count_winning_naive(black_box(g)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("mitm", n), &g, |b, g| {
            b.iter(|| count_winning_mitm(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn distributions(c: &mut Criterion) {
    c.bench_function("density n=12 k=3 x100", |b| {
        b.iter(|| {
            (1..=100)
                .map(|i| ordered_weight_density(12, 3, black_box(i as f64 / 300.0)).unwrap())
                .sum::<f64>()
        })
    });
    let mut group = c.benchmark_group("phi_z");
    for n in [3, 12, 40] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| phi_z(n, black_box(7.5)).unwrap())
        });
    }
    group.finish();
    c.bench_function("expected coleman n=12 q=0.7", |b| {
        let spec = ColemanCurveSpec::inversion(12);
        b.iter(|| expected_coleman(12, black_box(0.7), &spec).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let quotas: Vec<f64> = (26..=50).map(|i| i as f64 / 50.0).collect();
    let mut group = c.benchmark_group("monte-carlo");
    group.sample_size(10);
    group.bench_function("power curve n=8, 4096 samples", |b| {
        b.iter(|| mc_power_curve(8, &quotas, 4096, RandomSeed::from(1), PowerStatistic::Beta))
    });
    group.bench_function("coleman curve n=16, 4096 samples", |b| {
        b.iter(|| mc_coleman_curve(16, &quotas, 4096, RandomSeed::from(1)))
    });
    group.finish();
}

criterion_group!(benches, winning_kernels, distributions, monte_carlo);
criterion_main!(benches);
