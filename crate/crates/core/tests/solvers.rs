use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_submod_core::imgsum::{distance_matrix, image_task_family, synthetic_embeddings};
use robust_submod_core::objective::Coverage;
use robust_submod_core::solver::{
    brute_force, greedy, lazy_greedy, online_per_step, online_tr_driver, saturate_with_preference, ssa,
    stochastic_greedy, CoverStrategy, OnlineConfig, SaturationConfig,
};
use robust_submod_core::{
    AggregateMode, AggregateObjective, SampleSize, SetFunction, SimplexDistribution, Subset, SurrogateH, TaskFamily,
    Tasks,
};

fn family(seed: u64, tasks: usize, ground: usize) -> Tasks<Coverage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let universe = 12;
    let fams = (0..tasks)
        .map(|_| {
            let sets = (0..ground).map(|_| (0..universe).filter(|_| rng.random_bool(0.25)).collect()).collect();
            Coverage::weighted(vec![1.0 / universe as f64; universe], sets)
        })
        .collect();
    Tasks::new(fams).unwrap()
}

fn robust(fam: &Tasks<Coverage>, seed: u64, lambda: f64) -> AggregateObjective<&Tasks<Coverage>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
    let q = SimplexDistribution::sample_uniform(fam.num_tasks(), &mut rng).unwrap();
    AggregateObjective::new(fam, q, AggregateMode::KlRobust { lambda }).unwrap()
}

/// Exhaustive maximum over all sets of size `k`, written independently of the solvers.
fn exhaustive_max<F: SetFunction>(f: &F, k: usize) -> f64 {
    let n = f.ground_size();
    (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| f.evaluate(&Subset::from_mask(n, m)))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn brute_force_matches_exhaustive_enumeration() {
    for seed in 0..10 {
        let fam = family(seed, 3, 10);
        let g = robust(&fam, seed, 0.2);
        let best = brute_force(&g, 3).unwrap();
        assert!((g.evaluate(&best.selection) - exhaustive_max(&g, 3)).abs() < 1e-12);
    }
}

#[test]
fn facility_location_values_match_hand_computation() {
    let dist = distance_matrix(&synthetic_embeddings(6, 3, 9).unwrap()).unwrap();
    let fam = image_task_family(dist.clone());
    let s = Subset::from_indices(6, [1, 4]);
    let values = fam.evaluate(&s);
    for (i, v) in values.iter().enumerate() {
        let closest = dist.get(i, 1).min(dist.get(i, 4)).min(1.0);
        assert!((v - (1.0 - closest)).abs() < 1e-15);
    }
}

#[test]
fn saturation_at_zero_preference_equals_plain_saturation() {
    for seed in 0..10 {
        let fam = family(seed, 3, 12);
        let q = SimplexDistribution::uniform(3).unwrap();
        let p = saturate_with_preference(&fam, 4, &SaturationConfig::new(0.0, q)).unwrap();
        let b = ssa(&fam, 4, 1.0, CoverStrategy::Exact).unwrap();
        assert_eq!(p.selection, b.selection);
    }
}

#[test]
fn constant_stream_reuses_one_set_after_warm_up() {
    let fam = family(3, 2, 20);
    let stream: Vec<_> = (0..12).map(|_| robust(&fam, 3, 0.5)).collect();
    let config = OnlineConfig { window: 3, gamma: 0.5, lambda: 0.1, k: 4, sample: SampleSize::Fixed(8), seed: 5 };
    let steps = online_tr_driver(&stream, &config).unwrap();
    assert_eq!(steps.len(), 12);
    assert!(steps.last().unwrap().distinct <= 2 * config.k);
    assert!(steps[3..].windows(2).all(|w| w[0].played == w[1].played));
}

#[test]
fn tr_distinct_count_is_bounded_by_windows() {
    let stream: Vec<Coverage> = (0..10).map(|t| family(100 + t, 1, 25).tasks()[0].clone()).collect();
    let config = OnlineConfig { window: 5, gamma: 0.5, lambda: 0.1, k: 3, sample: SampleSize::Fixed(10), seed: 1 };
    let tr = online_tr_driver(&stream, &config).unwrap();
    assert!(tr.last().unwrap().distinct <= 10usize.div_ceil(5) * 3);
    let regular = online_per_step(&stream, 3, SampleSize::Fixed(10), 1).unwrap();
    assert_eq!(regular.len(), 10);
    assert!(online_tr_driver(&stream[..4], &config).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solvers_respect_the_cardinality_bound(seed in 0u64..1000, k in 1usize..6) {
        let fam = family(seed, 3, 14);
        let g = robust(&fam, seed, 0.1);
        for r in [greedy(&g, k).unwrap(), lazy_greedy(&g, k).unwrap(), stochastic_greedy(&g, k, SampleSize::Epsilon(0.1), seed).unwrap()] {
            prop_assert_eq!(r.selection.len(), k);
            prop_assert_eq!(r.order.len(), k);
        }
    }

    #[test]
    fn lazy_greedy_reproduces_greedy_on_the_surrogate(seed in 0u64..1000) {
        // Lazy bounds are only valid for submodular functions, so compare on h rather than G.
        let fam = family(seed, 3, 14);
        let q = SimplexDistribution::uniform(3).unwrap();
        let h = SurrogateH::new(&fam, q, 0.1).unwrap();
        let (a, b) = (greedy(&h, 5).unwrap(), lazy_greedy(&h, 5).unwrap());
        prop_assert!((h.evaluate(&a.selection) - h.evaluate(&b.selection)).abs() < 1e-12);
    }

    #[test]
    fn stochastic_greedy_is_seed_deterministic(seed in 0u64..1000) {
        let fam = family(seed, 2, 16);
        let g = robust(&fam, seed, 0.1);
        let a = stochastic_greedy(&g, 4, SampleSize::Fixed(5), seed).unwrap();
        let b = stochastic_greedy(&g, 4, SampleSize::Fixed(5), seed).unwrap();
        prop_assert_eq!(a.order, b.order);
    }

    #[test]
    fn greedy_is_within_the_classical_factor_of_optimum(seed in 0u64..1000) {
        // The weighted average of coverage tasks is monotone submodular.
        let fam = family(seed, 3, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = SimplexDistribution::sample_uniform(3, &mut rng).unwrap();
        let avg = AggregateObjective::new(&fam, q, AggregateMode::WeightedAverage).unwrap();
        let value = avg.evaluate(&greedy(&avg, 3).unwrap().selection);
        prop_assert!(value >= (1.0 - (-1.0f64).exp()) * exhaustive_max(&avg, 3) - 1e-12);
    }
}
