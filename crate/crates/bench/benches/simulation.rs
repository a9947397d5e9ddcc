use criterion::{criterion_group, criterion_main, Criterion};
use robust_submod_core::imgsum::{distance_matrix, image_task_family, synthetic_embeddings};
use robust_submod_core::satsim::{SatScenario, ScenarioConfig};
use robust_submod_core::solver::stochastic_greedy;
use robust_submod_core::{AggregateMode, AggregateObjective, SampleSize, SimplexDistribution, Subset};

fn satellite(c: &mut Criterion) {
    let scenario = SatScenario::new(ScenarioConfig::default()).unwrap();
    c.bench_function("sat_family_240", |b| b.iter(|| scenario.family()));
    c.bench_function("sat_advance_240", |b| {
        b.iter_batched(
            || SatScenario::new(ScenarioConfig::default()).unwrap(),
            |mut s| s.advance(&Subset::full(240)).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
}

fn images(c: &mut Criterion) {
    let embeddings = synthetic_embeddings(819, 64, 0).unwrap();
    c.bench_function("distance_matrix_819", |b| b.iter(|| distance_matrix(&embeddings).unwrap()));
    let family = image_task_family(distance_matrix(&embeddings).unwrap());
    let q = SimplexDistribution::uniform(819).unwrap();
    let objective = AggregateObjective::new(&family, q, AggregateMode::KlRobust { lambda: 0.1 }).unwrap();
    let mut group = c.benchmark_group("imgsum");
    group.sample_size(10);
    group.bench_function("stochastic_k10", |b| {
        b.iter(|| stochastic_greedy(&objective, 10, SampleSize::Epsilon(0.1), 3).unwrap())
    });
    group.finish();
}

criterion_group!(benches, satellite, images);
criterion_main!(benches);
