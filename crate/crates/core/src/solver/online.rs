//! Time-robust play over a stream of objectives.
//!
//! Time is cut into windows of `window` steps. The objectives observed in a
//! window become the tasks of a family whose reference distribution weighs
//! recent steps geometrically; the KL-robust maximizer of that family is
//! played for every step of the next window. The first window plays the
//! stochastic-greedy solution of its first objective.

use std::time::Instant;

use super::{derive_seed, stochastic_greedy, SampleSize};
use crate::error::{domain, Result};
use crate::objective::{AggregateMode, AggregateObjective, SetFunction, TaskFamily};
use crate::simplex::geometric_reference;
use crate::subset::Subset;

/// The objectives of one window viewed as a task family (oldest first).
pub struct WindowFamily<'a, F> {
    steps: &'a [F],
}

impl<'a, F: SetFunction> WindowFamily<'a, F> {
    pub fn new(steps: &'a [F]) -> Result<Self> {
        let first = steps.first().ok_or_else(|| domain("a window needs at least one objective"))?;
        if steps.iter().any(|s| s.ground_size() != first.ground_size()) {
            return Err(domain("window objectives must share a ground set"));
        }
        Ok(WindowFamily { steps })
    }
}

impl<F: SetFunction> TaskFamily for WindowFamily<'_, F> {
    type State = Vec<F::State>;

    fn ground_size(&self) -> usize {
        self.steps[0].ground_size()
    }
    fn num_tasks(&self) -> usize {
        self.steps.len()
    }
    fn empty_state(&self) -> Self::State {
        self.steps.iter().map(SetFunction::empty_state).collect()
    }
    fn insert(&self, state: &mut Self::State, e: usize) {
        for (f, s) in self.steps.iter().zip(state.iter_mut()) {
            f.insert(s, e);
        }
    }
    fn task_values(&self, state: &Self::State, out: &mut [f64]) {
        for ((f, s), o) in self.steps.iter().zip(state).zip(out) {
            *o = f.value(s);
        }
    }
    fn task_values_with(&self, state: &Self::State, e: usize, out: &mut [f64]) {
        for ((f, s), o) in self.steps.iter().zip(state).zip(out) {
            *o = f.value_with(s, e);
        }
    }
}

#[derive(Clone, Debug)]
pub struct OnlineConfig {
    pub window: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub k: usize,
    pub sample: SampleSize,
    pub seed: u64,
}

/// What was played at one step.
#[derive(Clone, Debug)]
pub struct OnlineStep {
    pub played: Subset,
    /// Objective of this step evaluated at the played set.
    pub utility: f64,
    /// Distinct elements played so far, this step included.
    pub distinct: usize,
    /// Solver time spent at this step.
    pub solve_time: f64,
    pub evaluations: u64,
}

struct Recorder {
    steps: Vec<OnlineStep>,
    used: Subset,
}

impl Recorder {
    fn play<F: SetFunction>(&mut self, f: &F, played: &Subset, solve_time: f64, evaluations: u64) {
        self.used.union_with(played);
        self.steps.push(OnlineStep {
            played: played.clone(),
            utility: f.evaluate(played),
            distinct: self.used.len(),
            solve_time,
            evaluations,
        });
    }
}

/// Window-robust play over `stream`.
pub fn online_tr_driver<F: SetFunction>(stream: &[F], config: &OnlineConfig) -> Result<Vec<OnlineStep>> {
    if config.window == 0 {
        return Err(domain("window must be at least one step"));
    }
    if stream.len() < config.window {
        return Err(domain(format!("stream of {} steps is shorter than the window {}", stream.len(), config.window)));
    }
    let ground = stream[0].ground_size();
    let reference = geometric_reference(config.gamma, config.window)?;
    let mut rec = Recorder { steps: Vec::with_capacity(stream.len()), used: Subset::empty(ground) };

    let warmup = stochastic_greedy(&stream[0], config.k, config.sample, derive_seed(config.seed, 0))?;
    let mut playing = warmup.selection;
    let mut pending = (warmup.wall_time, warmup.evaluations);
    for (t, f) in stream.iter().enumerate() {
        rec.play(f, &playing, pending.0, pending.1);
        pending = (0.0, 0);
        if (t + 1) % config.window == 0 {
            let window = WindowFamily::new(&stream[t + 1 - config.window..=t])?;
            let objective =
                AggregateObjective::new(window, reference.clone(), AggregateMode::KlRobust { lambda: config.lambda })?;
            let started = Instant::now();
            // Every window reuses one sampling stream, so identical windows yield identical plays.
            let solved = stochastic_greedy(&objective, config.k, config.sample, derive_seed(config.seed, 1))?;
            playing = solved.selection;
            // Charged to the step at which the solve happens.
            if let Some(last) = rec.steps.last_mut() {
                last.solve_time += started.elapsed().as_secs_f64();
                last.evaluations += solved.evaluations;
            }
        }
    }
    Ok(rec.steps)
}

/// Baseline: solve and play each step's objective independently.
pub fn online_per_step<F: SetFunction>(
    stream: &[F],
    k: usize,
    sample: SampleSize,
    seed: u64,
) -> Result<Vec<OnlineStep>> {
    let first = stream.first().ok_or_else(|| domain("empty stream"))?;
    let mut rec = Recorder { steps: Vec::with_capacity(stream.len()), used: Subset::empty(first.ground_size()) };
    for (t, f) in stream.iter().enumerate() {
        let solved = stochastic_greedy(f, k, sample, derive_seed(seed, t as u64))?;
        rec.play(f, &solved.selection, solved.wall_time, solved.evaluations);
    }
    Ok(rec.steps)
}
