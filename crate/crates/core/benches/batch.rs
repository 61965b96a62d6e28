use std::hint::black_box;

use bwrank::batch::{integrate_many, integrate_many_sequential, map_trials, map_trials_sequential};
use bwrank::geodesics::{GeodesicState, IntegrateOptions};
use bwrank::sampling::random_state;
use bwrank::verify::{run_property, VerifyConfig, PROPERTIES};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn states(count: usize) -> Vec<GeodesicState> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..count).map(|_| random_state(8, 3, &mut rng)).collect()
}

fn bench_integrate(c: &mut Criterion) {
    let opts = IntegrateOptions {
        t_max: 0.2,
        dt: 1e-3,
        ..Default::default()
    };
    let mut group = c.benchmark_group("integrate_many");
    group.sample_size(10);
    for count in [4, 32] {
        let s = states(count);
        group.bench_with_input(BenchmarkId::new("parallel", count), &s, |b, s| {
            b.iter(|| integrate_many(black_box(s), &opts))
        });
        group.bench_with_input(BenchmarkId::new("sequential", count), &s, |b, s| {
            b.iter(|| integrate_many_sequential(black_box(s), &opts))
        });
    }
    group.finish();
}

fn bench_trials(c: &mut Criterion) {
    // the energy-conservation property integrates a random geodesic per trial
    let (name, check, _) = PROPERTIES[13];
    let cfg = VerifyConfig {
        trials: 1,
        ..Default::default()
    };
    let mut group = c.benchmark_group("verify_trials");
    group.sample_size(10);
    let one = |i: usize| run_property(13, name, check, 1.0, &VerifyConfig { seed: i as u64, ..cfg }).worst;
    group.bench_function("parallel", |b| b.iter(|| map_trials(32, one)));
    group.bench_function("sequential", |b| b.iter(|| map_trials_sequential(32, one)));
    group.finish();
}

criterion_group!(benches, bench_integrate, bench_trials);
criterion_main!(benches);
