//! Bisection over saturation levels with greedy partial covers.
//!
//! For a level `k`, the truncated mean
//! `fbar_k(X) = (1/n) sum_i min(f_i(X) - lambda Q_i, k)` reaches `k` exactly
//! when every shifted task reaches `k`. A level is feasible when the greedy
//! cover of `fbar_k` saturates within `alpha * K` elements.
//!
//! Tasks with `f_i(N) = f_i(∅)` are left out of the bisection: no selection
//! moves them, so they would only clamp every level at their constant.

use std::time::Instant;

use super::greedy::{lazy_run, Selection};
use super::SolverResult;
use crate::error::{domain, Result};
use crate::objective::{SetFunction, TaskFamily};
use crate::simplex::SimplexDistribution;
use crate::subset::Subset;

/// A cover counts as saturated once it is within this distance of the level.
pub const SATURATION_SLACK: f64 = 1e-9;

/// How each partial cover is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoverStrategy {
    /// Exact greedy; valid for any monotone family.
    #[default]
    Exact,
    /// Lazy greedy; same covers as `Exact` when every task is submodular.
    Lazy,
}

#[derive(Clone, Debug)]
pub struct SaturationConfig {
    pub lambda: f64,
    pub q: SimplexDistribution,
    /// Bicriteria slack: covers of up to `alpha * K` elements are accepted.
    pub alpha: f64,
    pub cover: CoverStrategy,
    /// Bisection stops once the level bracket is narrower than this; `None` means `1/n`.
    pub resolution: Option<f64>,
}

impl SaturationConfig {
    pub fn new(lambda: f64, q: SimplexDistribution) -> Self {
        SaturationConfig { lambda, q, alpha: 1.0, cover: CoverStrategy::Exact, resolution: None }
    }

    fn validate(&self, tasks: usize) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(domain(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if !(self.alpha >= 1.0) {
            return Err(domain(format!("alpha must be at least 1, got {}", self.alpha)));
        }
        check_resolution(self.resolution)?;
        if self.q.dim() != tasks {
            return Err(domain(format!("family has {tasks} tasks but Q has dimension {}", self.q.dim())));
        }
        Ok(())
    }
}

/// `(1/n) sum_i min(f_i - shift_i, level)`.
pub struct TruncatedMean<T> {
    family: T,
    shifts: Vec<f64>,
    level: f64,
}

impl<T: TaskFamily> TruncatedMean<T> {
    pub fn new(family: T, shifts: Vec<f64>, level: f64) -> Result<Self> {
        if shifts.len() != family.num_tasks() {
            return Err(domain("one shift per task is required"));
        }
        Ok(TruncatedMean { family, shifts, level })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    fn combine(&self, values: &[f64]) -> f64 {
        let total: f64 = values.iter().zip(&self.shifts).map(|(f, s)| (f - s).min(self.level)).sum();
        total / values.len() as f64
    }
}

impl<T: TaskFamily> SetFunction for TruncatedMean<T> {
    type State = T::State;

    fn ground_size(&self) -> usize {
        self.family.ground_size()
    }
    fn empty_state(&self) -> T::State {
        self.family.empty_state()
    }
    fn insert(&self, state: &mut T::State, e: usize) {
        self.family.insert(state, e)
    }
    fn value(&self, state: &T::State) -> f64 {
        let mut out = vec![0.0; self.family.num_tasks()];
        self.family.task_values(state, &mut out);
        self.combine(&out)
    }
    fn value_with(&self, state: &T::State, e: usize) -> f64 {
        let mut out = vec![0.0; self.family.num_tasks()];
        self.family.task_values_with(state, e, &mut out);
        self.combine(&out)
    }
}

/// A greedy partial cover of a truncated objective.
#[derive(Clone, Debug)]
pub struct Cover {
    pub set: Subset,
    pub order: Vec<usize>,
    pub value: f64,
    /// Whether the cover reached the level (within [`SATURATION_SLACK`]).
    pub saturated: bool,
    pub evaluations: u64,
}

/// Greedily adds the element of largest gain until the truncated mean reaches its
/// level, no element has a positive gain, or the ground set is exhausted. With a
/// `size_cap`, stops as soon as the cover holds more than `size_cap` elements.
pub fn greedy_partial_cover<T: TaskFamily>(
    objective: &TruncatedMean<T>,
    strategy: CoverStrategy,
    size_cap: Option<usize>,
) -> Cover {
    let target = objective.level - SATURATION_SLACK;
    let n = objective.ground_size();
    let max_size = size_cap.map_or(n, |c| (c + 1).min(n));
    let sel = match strategy {
        CoverStrategy::Lazy => lazy_run(objective, max_size, |v| v >= target),
        CoverStrategy::Exact => {
            let mut sel = Selection::new(objective);
            while sel.value < target && sel.order.len() < max_size {
                let candidates: Vec<usize> = sel.set.complement().collect();
                match sel.best_of(objective, candidates.into_iter()) {
                    Some((e, v)) if v - sel.value > 0.0 => sel.add(objective, e, v),
                    _ => break,
                }
            }
            sel
        }
    };
    Cover {
        saturated: sel.value >= target,
        set: sel.set,
        order: sel.order,
        value: sel.value,
        evaluations: sel.evaluations,
    }
}

/// One bisection iteration.
#[derive(Clone, Debug)]
pub struct BisectionStep {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub cover_size: usize,
    pub accepted: bool,
}

struct Bisection {
    result: SolverResult,
    trace: Vec<BisectionStep>,
}

fn bisect<T: TaskFamily>(
    family: &T,
    k: usize,
    shifts: &[f64],
    mut lower: f64,
    mut upper: f64,
    alpha: f64,
    strategy: CoverStrategy,
    resolution: Option<f64>,
    started: Instant,
) -> Result<Bisection> {
    let n = family.num_tasks();
    let cap = (alpha * k as f64).floor() as usize;
    let floor = resolution.unwrap_or(1.0 / n as f64);
    let mut best = Cover {
        set: Subset::empty(family.ground_size()),
        order: Vec::new(),
        value: lower,
        saturated: true,
        evaluations: 0,
    };
    let mut evaluations = 2;
    let mut trace = Vec::new();
    while upper - lower >= floor {
        let level = 0.5 * (lower + upper);
        let objective = TruncatedMean::new(family, shifts.to_vec(), level)?;
        let cover = greedy_partial_cover(&objective, strategy, Some(cap));
        evaluations += cover.evaluations;
        let accepted = cover.saturated && cover.set.len() <= cap;
        trace.push(BisectionStep { lower, upper, level, cover_size: cover.set.len(), accepted });
        if accepted {
            lower = level;
            best = cover;
        } else {
            upper = level;
        }
    }
    let values = family.evaluate(&best.set);
    let objective_value = values.iter().zip(shifts).map(|(f, s)| f - s).fold(f64::INFINITY, f64::min);
    Ok(Bisection {
        result: SolverResult {
            selection: best.set,
            order: best.order,
            objective_value,
            evaluations,
            wall_time: started.elapsed().as_secs_f64(),
            seed: 0,
        },
        trace,
    })
}

fn empty_result(ground_size: usize, started: Instant) -> SolverResult {
    SolverResult {
        selection: Subset::empty(ground_size),
        order: Vec::new(),
        objective_value: 0.0,
        evaluations: 1,
        wall_time: started.elapsed().as_secs_f64(),
        seed: 0,
    }
}

fn check_k<T: TaskFamily>(family: &T, k: usize) -> Result<()> {
    if k > family.ground_size() {
        return Err(domain(format!("cardinality bound {k} exceeds the ground set size {}", family.ground_size())));
    }
    Ok(())
}

/// Saturate with Preference: bisection on the level of `min_i (f_i - lambda Q_i)`.
/// With `lambda = 0` this is the plain saturation algorithm.
pub fn saturate_with_preference<T: TaskFamily>(
    family: &T,
    k: usize,
    config: &SaturationConfig,
) -> Result<SolverResult> {
    saturation_trace(family, k, config).map(|(r, _)| r)
}

/// [`saturate_with_preference`] together with its bisection iterations.
pub fn saturation_trace<T: TaskFamily>(
    family: &T,
    k: usize,
    config: &SaturationConfig,
) -> Result<(SolverResult, Vec<BisectionStep>)> {
    check_k(family, k)?;
    config.validate(family.num_tasks())?;
    let started = Instant::now();
    let shifts: Vec<f64> = config.q.weights().iter().map(|w| config.lambda * w).collect();
    let Some(active) = active_tasks(family) else {
        return Ok((empty_result(family.ground_size(), started), Vec::new()));
    };
    let b = match active {
        Some(tasks) => {
            let shifts = tasks.iter().map(|&i| shifts[i]).collect();
            swp_bisect(&ActiveTasks::new(family, tasks), k, shifts, config, started)?
        }
        None => swp_bisect(family, k, shifts, config, started)?,
    };
    Ok((b.result, b.trace))
}

fn swp_bisect<T: TaskFamily>(
    family: &T,
    k: usize,
    shifts: Vec<f64>,
    config: &SaturationConfig,
    started: Instant,
) -> Result<Bisection> {
    let shifted_min = |values: Vec<f64>| values.iter().zip(&shifts).map(|(f, s)| f - s).fold(f64::INFINITY, f64::min);
    let upper = shifted_min(family.evaluate(&Subset::full(family.ground_size())));
    if upper <= 0.0 {
        return Ok(Bisection { result: empty_result(family.ground_size(), started), trace: Vec::new() });
    }
    // Shifted objectives can be negative on the empty set; the empty cover
    // saturates exactly at that level.
    let lower = shifted_min(family.evaluate(&Subset::empty(family.ground_size()))).min(0.0);
    bisect(family, k, &shifts, lower, upper, config.alpha, config.cover, config.resolution, started)
}

/// The submodular saturation algorithm for `max_S min_i f_i(S)` s.t. `|S| <= alpha K`.
pub fn ssa<T: TaskFamily>(family: &T, k: usize, alpha: f64, strategy: CoverStrategy) -> Result<SolverResult> {
    ssa_to_resolution(family, k, alpha, strategy, None)
}

/// [`ssa`] with an explicit bisection resolution (`None` means `1/n`).
pub fn ssa_to_resolution<T: TaskFamily>(
    family: &T,
    k: usize,
    alpha: f64,
    strategy: CoverStrategy,
    resolution: Option<f64>,
) -> Result<SolverResult> {
    check_k(family, k)?;
    if !(alpha >= 1.0) {
        return Err(domain(format!("alpha must be at least 1, got {alpha}")));
    }
    check_resolution(resolution)?;
    let started = Instant::now();
    match active_tasks(family) {
        None => Ok(empty_result(family.ground_size(), started)),
        Some(Some(tasks)) => ssa_bisect(&ActiveTasks::new(family, tasks), k, alpha, strategy, resolution, started),
        Some(None) => ssa_bisect(family, k, alpha, strategy, resolution, started),
    }
}

fn check_resolution(resolution: Option<f64>) -> Result<()> {
    match resolution {
        Some(r) if !(r > 0.0 && r.is_finite()) => {
            Err(domain(format!("bisection resolution must be positive, got {r}")))
        }
        _ => Ok(()),
    }
}

fn ssa_bisect<T: TaskFamily>(
    family: &T,
    k: usize,
    alpha: f64,
    strategy: CoverStrategy,
    resolution: Option<f64>,
    started: Instant,
) -> Result<SolverResult> {
    let full = family.evaluate(&Subset::full(family.ground_size()));
    let upper = full.iter().copied().fold(f64::INFINITY, f64::min);
    if upper <= 0.0 {
        return Ok(empty_result(family.ground_size(), started));
    }
    let shifts = vec![0.0; family.num_tasks()];
    Ok(bisect(family, k, &shifts, 0.0, upper, alpha, strategy, resolution, started)?.result)
}

/// Tasks that some selection can change. A task with `f_i(N) = f_i(∅)` is
/// constant on a monotone family, so it ties every candidate set and only
/// pins the max-min at its constant. `None` when every task is constant,
/// `Some(None)` when none is.
fn active_tasks<T: TaskFamily>(family: &T) -> Option<Option<Vec<usize>>> {
    let n = family.ground_size();
    let full = family.evaluate(&Subset::full(n));
    let empty = family.evaluate(&Subset::empty(n));
    let active: Vec<usize> = (0..full.len()).filter(|&i| full[i] > empty[i]).collect();
    match active.len() {
        0 => None,
        a if a == full.len() => Some(None),
        _ => Some(Some(active)),
    }
}

/// A family restricted to some of its tasks.
struct ActiveTasks<'a, T> {
    family: &'a T,
    tasks: Vec<usize>,
}

impl<'a, T: TaskFamily> ActiveTasks<'a, T> {
    fn new(family: &'a T, tasks: Vec<usize>) -> Self {
        ActiveTasks { family, tasks }
    }

    fn select(&self, all: &[f64], out: &mut [f64]) {
        for (o, &i) in out.iter_mut().zip(&self.tasks) {
            *o = all[i];
        }
    }
}

impl<T: TaskFamily> TaskFamily for ActiveTasks<'_, T> {
    type State = T::State;

    fn ground_size(&self) -> usize {
        self.family.ground_size()
    }
    fn num_tasks(&self) -> usize {
        self.tasks.len()
    }
    fn empty_state(&self) -> T::State {
        self.family.empty_state()
    }
    fn insert(&self, state: &mut T::State, e: usize) {
        self.family.insert(state, e)
    }
    fn task_values(&self, state: &T::State, out: &mut [f64]) {
        let mut all = vec![0.0; self.family.num_tasks()];
        self.family.task_values(state, &mut all);
        self.select(&all, out);
    }
    fn task_values_with(&self, state: &T::State, e: usize, out: &mut [f64]) {
        let mut all = vec![0.0; self.family.num_tasks()];
        self.family.task_values_with(state, e, &mut all);
        self.select(&all, out);
    }
}
