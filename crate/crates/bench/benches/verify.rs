use criterion::{criterion_group, criterion_main, Criterion};
use rankgame::equilibrium::engagement_eq_homogeneous;
use rankgame::parallel::rng_from_seed;
use rankgame::verify::best_response_gap;
use rankgame::{Metric, ModelInstance};
use std::hint::black_box;

fn verify(c: &mut Criterion) {
    let inst = ModelInstance::linear(1.0, 0.0, &[1.0]).unwrap();
    let s = engagement_eq_homogeneous(&inst, 2).unwrap();
    let mut group = c.benchmark_group("best_response_gap");
    group.sample_size(10);
    group.bench_function("homogeneous_k50_n10k", |b| {
        b.iter(|| {
            let mut rng = rng_from_seed(7);
            black_box(best_response_gap(&inst, Metric::Engagement, &s, 2, 50, 10_000, &mut rng).unwrap())
        })
    });
    group.finish();
}

criterion_group!(benches, verify);
criterion_main!(benches);
