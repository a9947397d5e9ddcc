//! The `verify` property battery.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_submod_core::imgsum::{distance_matrix, image_task_family, synthetic_embeddings};
use robust_submod_core::objective::{wsc_estimate, Coverage, TaskOf, WscMode};
use robust_submod_core::satsim::{FilterState, Lorenz63, SatScenario, ScenarioConfig, Ukf, WalkerDelta};
use robust_submod_core::solver::{
    greedy, saturate_with_preference, ssa, stochastic_greedy, CoverStrategy, SaturationConfig,
};
use robust_submod_core::{
    kl_robust_value, link_g, surrogate_h_of, SampleSize, SimplexDistribution, Subset, TaskFamily, Tasks,
};

type Matrix3 = robust_submod_core::satsim::Matrix3<f64>;
type Vector3 = robust_submod_core::satsim::Vector3<f64>;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> String {
        self.checks.iter().filter(|c| !c.passed).map(ToString::to_string).collect::<Vec<_>>().join("\n")
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check { name, passed, detail });
    }
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, SimplexDistribution) {
    let f = (0..n).map(|_| rng.random::<f64>()).collect();
    (f, SimplexDistribution::sample_uniform(n, rng).expect("n > 0"))
}

fn coverage_family(rng: &mut ChaCha8Rng, tasks: usize, ground: usize) -> Tasks<Coverage> {
    let fams = (0..tasks).map(|_| Coverage::random(rng, ground, 20, 0.15)).collect();
    Tasks::new(fams).expect("consistent ground sets")
}

/// Minimizes a convex function on `[lo, hi]` by golden-section search.
fn golden_min(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    f(0.5 * (a + b)).min(f(lo)).min(f(hi))
}

/// Primal value `min_P sum P_i f_i + lambda KL(P || Q)` for two or three tasks.
fn primal_min(f: &[f64], q: &[f64], lambda: f64) -> f64 {
    let term = |p: f64, i: usize| if p > 0.0 { p * f[i] + lambda * p * (p / q[i]).ln() } else { 0.0 };
    match f.len() {
        2 => golden_min(0.0, 1.0, |p| term(p, 0) + term(1.0 - p, 1)),
        3 => golden_min(0.0, 1.0, |p0| {
            golden_min(0.0, 1.0 - p0, |p1| term(p0, 0) + term(p1, 1) + term((1.0 - p0 - p1).max(0.0), 2))
        }),
        _ => unreachable!("primal oracle handles two or three tasks"),
    }
}

/// Error ratio of RK4 between `n` and `2n` steps against a fine reference.
pub fn rk4_halving_ratio() -> f64 {
    let m = Lorenz63::default();
    let run = |n: usize| (0..n).fold(Vector3::new(1.0, 1.0, 1.0), |x, _| m.step(&x, 0.5 / n as f64));
    let reference = run(1600);
    (run(50) - reference).norm() / (run(100) - reference).norm()
}

/// Largest entrywise gap between the unscented filter on identity dynamics
/// and the closed-form Kalman recursion.
pub fn ukf_kalman_gap(steps: usize, seed: u64) -> f64 {
    let ukf = Ukf::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p0 = Matrix3::new(2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0);
    let mut u = FilterState { mean: Vector3::new(0.5, -1.0, 2.0), covariance: p0 };
    let (mut x, mut p) = (u.mean, p0);
    let q = Matrix3::identity() * 1e-2;
    let r = Matrix3::new(0.5, 0.1, 0.0, 0.1, 0.8, 0.0, 0.0, 0.0, 1.2);
    let mut gap: f64 = 0.0;
    for step in 0..steps {
        u = ukf.predict(&u, |v| *v, &q).expect("SPD");
        p += q;
        if step % 3 != 2 {
            let z = Vector3::new(rng.random(), rng.random(), rng.random()) * 4.0;
            u = ukf.update(&u, &z, &r).expect("SPD");
            let k = p * (p + r).try_inverse().expect("invertible");
            x += k * (z - x);
            p = (Matrix3::identity() - k) * p;
            p = (p + p.transpose()) * 0.5;
        }
        gap = gap.max((u.mean - x).amax()).max((u.covariance - p).amax());
    }
    gap
}

pub fn run_verify(quick: bool) -> VerifyReport {
    let scale = if quick { 1 } else { 10 };
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // Sandwich bounds and the decomposition through h.
    let (mut sandwich, mut decomposition) = (0usize, 0.0f64);
    for _ in 0..1000 * scale {
        let n = rng.random_range(1..=8);
        let (f, q) = random_values(&mut rng, n);
        let lambda = [0.01, 0.1, 1.0, 10.0][rng.random_range(0..4)];
        let g = kl_robust_value(&f, &q, lambda).expect("valid");
        let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
        if g < lo - 1e-12 || g > q.expectation(&f) + 1e-12 {
            sandwich += 1;
        }
        // Recovering G from h loses about lambda * u / (1 - h); below lambda = 0.1
        // that exceeds the tolerance once every f_i is near 1.
        let lambda = [0.1, 0.5, 1.0, 10.0][rng.random_range(0..4)];
        let g = kl_robust_value(&f, &q, lambda).expect("valid");
        let h = surrogate_h_of(&f, &q, lambda).expect("valid");
        decomposition = decomposition.max((link_g(h, lambda).expect("h < 1") - g).abs());
    }
    report.push("sandwich bounds", sandwich == 0, format!("{sandwich} violations"));
    report.push("decomposition", decomposition <= 1e-12, format!("max gap {decomposition:.3e}"));

    // Dual equivalence against a direct primal minimization.
    let mut dual: f64 = 0.0;
    for _ in 0..20 * scale {
        let n = rng.random_range(2..=3);
        let (f, q) = random_values(&mut rng, n);
        let lambda = [0.05, 0.1, 1.0][rng.random_range(0..3)];
        let g = kl_robust_value(&f, &q, lambda).expect("valid");
        dual = dual.max((g - primal_min(&f, q.weights(), lambda)).abs());
    }
    report.push("dual equivalence", dual <= 1e-8, format!("max gap {dual:.3e}"));

    // Submodularity of h on coverage families.
    let mut h_violations = 0usize;
    for _ in 0..100 * scale {
        let fam = coverage_family(&mut rng, 3, 12);
        let q = SimplexDistribution::sample_uniform(3, &mut rng).expect("3 tasks");
        let lambda = [0.05, 0.1, 1.0][rng.random_range(0..3)];
        let h = |s: &Subset| surrogate_h_of(&fam.evaluate(s), &q, lambda).expect("valid");
        let t = Subset::from_mask(12, rng.random_range(0..1u64 << 12));
        let s = Subset::from_indices(12, t.iter().filter(|_| rng.random_bool(0.5)).collect::<Vec<_>>());
        let Some(e) = (0..12).find(|&e| !t.contains(e)) else { continue };
        if h(&s.with(e)) - h(&s) < h(&t.with(e)) - h(&t) - 1e-9 {
            h_violations += 1;
        }
    }
    report.push("surrogate submodularity", h_violations == 0, format!("{h_violations} violations"));

    // Weak submodularity constants.
    let mut infinite = Vec::new();
    let cov = coverage_family(&mut rng, 2, 10);
    let img = image_task_family(distance_matrix(&synthetic_embeddings(10, 4, 3).expect("valid")).expect("valid"));
    let sc = SatScenario::new(ScenarioConfig {
        constellation: WalkerDelta::pattern(75.0, 60, 12, 1),
        seed: 4,
        ..ScenarioConfig::default()
    })
    .expect("valid scenario");
    let sat = sc.family_for(&(0..10).collect::<Vec<_>>());
    for task in 0..2 {
        if !wsc_estimate(&TaskOf::new(&cov, task), WscMode::Exhaustive).expect("small").is_finite() {
            infinite.push(format!("coverage {task}"));
        }
    }
    for task in 0..if quick { 3 } else { 10 } {
        if !wsc_estimate(&TaskOf::new(&img, task), WscMode::Exhaustive).expect("small").is_finite() {
            infinite.push(format!("image {task}"));
        }
    }
    for task in 0..sat.num_tasks() {
        if !wsc_estimate(&TaskOf::new(&sat, task), WscMode::Exhaustive).expect("small").is_finite() {
            infinite.push(format!("satellite {task}"));
        }
    }
    report.push("finite weak-submodularity constants", infinite.is_empty(), format!("unbounded: {infinite:?}"));

    // Solver degeneracies.
    let mut mismatches = 0usize;
    for seed in 0..5 * scale as u64 {
        let fam = coverage_family(&mut rng, 3, 15);
        let q = SimplexDistribution::sample_uniform(3, &mut rng).expect("3 tasks");
        let avg = robust_submod_core::AggregateObjective::new(
            &fam,
            q.clone(),
            robust_submod_core::AggregateMode::KlRobust { lambda: 0.1 },
        )
        .expect("valid");
        let g = greedy(&avg, 5).expect("valid");
        let s = stochastic_greedy(&avg, 5, SampleSize::Fixed(15), seed).expect("valid");
        let p = saturate_with_preference(&fam, 5, &SaturationConfig::new(0.0, q)).expect("valid");
        let b = ssa(&fam, 5, 1.0, CoverStrategy::Exact).expect("valid");
        mismatches += usize::from(g.order != s.order) + usize::from(p.order != b.order);
    }
    report.push("solver degeneracies", mismatches == 0, format!("{mismatches} mismatches"));

    let ratio = rk4_halving_ratio();
    report.push("RK4 order", (8.0..=32.0).contains(&ratio), format!("step-halving ratio {ratio:.3}"));
    let gap = ukf_kalman_gap(20, 11);
    report.push("UKF vs Kalman", gap <= 1e-8, format!("max gap {gap:.3e}"));
    report
}
