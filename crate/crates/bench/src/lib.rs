//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust_submod_core::objective::Coverage;
use robust_submod_core::{SimplexDistribution, Tasks};

/// A seeded family of `tasks` random coverage functions over `ground` elements.
pub fn coverage_family(tasks: usize, ground: usize, seed: u64) -> (Tasks<Coverage>, SimplexDistribution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = (0..tasks).map(|_| Coverage::random(&mut rng, ground, 4 * ground, 0.05)).collect();
    let q = SimplexDistribution::sample_uniform(tasks, &mut rng).expect("positive task count");
    (Tasks::new(family).expect("shared ground set"), q)
}
