//! Set functions, multi-task families and their aggregate objectives.
//!
//! Oracles are evaluated incrementally: a solver holds an oracle-specific
//! `State` for the current selection and asks for the value of the state, or
//! of the state extended by one element, without rebuilding it.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::simplex::{kl_robust_value, SimplexDistribution};
use crate::subset::Subset;

/// A real-valued function of subsets of the ground set `0..ground_size()`.
pub trait SetFunction {
    type State: Clone;

    fn ground_size(&self) -> usize;

    /// State representing the empty set.
    fn empty_state(&self) -> Self::State;

    /// Adds `e` to the set represented by `state`. `e` must not already be present.
    fn insert(&self, state: &mut Self::State, e: usize);

    fn value(&self, state: &Self::State) -> f64;

    /// Value of the represented set extended by `e`.
    fn value_with(&self, state: &Self::State, e: usize) -> f64 {
        let mut next = state.clone();
        self.insert(&mut next, e);
        self.value(&next)
    }

    fn state_of(&self, set: &Subset) -> Self::State {
        let mut state = self.empty_state();
        for e in set.iter() {
            self.insert(&mut state, e);
        }
        state
    }

    fn evaluate(&self, set: &Subset) -> f64 {
        self.value(&self.state_of(set))
    }
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    type State = F::State;

    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn empty_state(&self) -> Self::State {
        (**self).empty_state()
    }
    fn insert(&self, state: &mut Self::State, e: usize) {
        (**self).insert(state, e)
    }
    fn value(&self, state: &Self::State) -> f64 {
        (**self).value(state)
    }
    fn value_with(&self, state: &Self::State, e: usize) -> f64 {
        (**self).value_with(state, e)
    }
}

/// `f(S + e) - f(S)`.
pub fn marginal_gain<F: SetFunction>(f: &F, e: usize, set: &Subset) -> Result<f64> {
    if e >= f.ground_size() {
        return Err(Error::Contract(format!("element {e} is outside the ground set")));
    }
    if set.contains(e) {
        return Err(Error::Contract(format!("element {e} is already in the set")));
    }
    let state = f.state_of(set);
    Ok(f.value_with(&state, e) - f.value(&state))
}

/// A set function given by a closure over subsets; the state is the subset itself.
pub struct FnSetFunction<F> {
    ground_size: usize,
    f: F,
}

impl<F: Fn(&Subset) -> f64> FnSetFunction<F> {
    pub fn new(ground_size: usize, f: F) -> Self {
        FnSetFunction { ground_size, f }
    }
}

impl<F: Fn(&Subset) -> f64> SetFunction for FnSetFunction<F> {
    type State = Subset;

    fn ground_size(&self) -> usize {
        self.ground_size
    }
    fn empty_state(&self) -> Subset {
        Subset::empty(self.ground_size)
    }
    fn insert(&self, state: &mut Subset, e: usize) {
        state.insert(e);
    }
    fn value(&self, state: &Subset) -> f64 {
        (self.f)(state)
    }
}

/// `f(S) = sum_{e in S} w_e`.
#[derive(Clone, Debug)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Self {
        Modular { weights }
    }
}

impl SetFunction for Modular {
    type State = f64;

    fn ground_size(&self) -> usize {
        self.weights.len()
    }
    fn empty_state(&self) -> f64 {
        0.0
    }
    fn insert(&self, state: &mut f64, e: usize) {
        *state += self.weights[e];
    }
    fn value(&self, state: &f64) -> f64 {
        *state
    }
    fn value_with(&self, state: &f64, e: usize) -> f64 {
        state + self.weights[e]
    }
}

/// Weighted coverage: element `e` covers `sets[e]`, and `f(S)` is the total
/// weight of items covered by at least one selected element.
#[derive(Clone, Debug)]
pub struct Coverage {
    sets: Vec<Vec<usize>>,
    item_weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CoverageState {
    counts: Vec<u32>,
    covered: f64,
}

impl Coverage {
    /// Unit-weight coverage over `universe` items.
    pub fn new(universe: usize, sets: Vec<Vec<usize>>) -> Self {
        Self::weighted(vec![1.0; universe], sets)
    }

    pub fn weighted(item_weights: Vec<f64>, sets: Vec<Vec<usize>>) -> Self {
        for s in &sets {
            assert!(s.iter().all(|&i| i < item_weights.len()), "coverage item out of range");
        }
        Coverage { sets, item_weights }
    }

    /// A random instance where each element covers each item independently with probability `density`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, ground_size: usize, universe: usize, density: f64) -> Self {
        let sets = (0..ground_size).map(|_| (0..universe).filter(|_| rng.random_bool(density)).collect()).collect();
        Coverage::new(universe, sets)
    }
}

impl SetFunction for Coverage {
    type State = CoverageState;

    fn ground_size(&self) -> usize {
        self.sets.len()
    }
    fn empty_state(&self) -> CoverageState {
        CoverageState { counts: vec![0; self.item_weights.len()], covered: 0.0 }
    }
    fn insert(&self, state: &mut CoverageState, e: usize) {
        for &i in &self.sets[e] {
            if state.counts[i] == 0 {
                state.covered += self.item_weights[i];
            }
            state.counts[i] += 1;
        }
    }
    fn value(&self, state: &CoverageState) -> f64 {
        state.covered
    }
    fn value_with(&self, state: &CoverageState, e: usize) -> f64 {
        state.covered
            + self.sets[e].iter().filter(|&&i| state.counts[i] == 0).map(|&i| self.item_weights[i]).sum::<f64>()
    }
}

/// `f(S) / f(N)`.
#[derive(Clone, Debug)]
pub struct Normalized<F> {
    inner: F,
    full_value: f64,
}

impl<F: SetFunction> Normalized<F> {
    pub fn full_value(&self) -> f64 {
        self.full_value
    }

    pub fn into_inner(self) -> F {
        self.inner
    }
}

/// Divides `f` by its value on the whole ground set.
pub fn normalize_task<F: SetFunction>(f: F) -> Result<Normalized<F>> {
    let full_value = f.evaluate(&Subset::full(f.ground_size()));
    if !(full_value > 0.0) {
        return Err(domain(format!("full-set value {full_value} must be positive to normalize")));
    }
    Ok(Normalized { inner: f, full_value })
}

impl<F: SetFunction> SetFunction for Normalized<F> {
    type State = F::State;

    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn empty_state(&self) -> F::State {
        self.inner.empty_state()
    }
    fn insert(&self, state: &mut F::State, e: usize) {
        self.inner.insert(state, e)
    }
    fn value(&self, state: &F::State) -> f64 {
        self.inner.value(state) / self.full_value
    }
    fn value_with(&self, state: &F::State, e: usize) -> f64 {
        self.inner.value_with(state, e) / self.full_value
    }
}

/// `n` set functions over a shared ground set, evaluated together.
pub trait TaskFamily {
    type State: Clone;

    fn ground_size(&self) -> usize;

    fn num_tasks(&self) -> usize;

    fn empty_state(&self) -> Self::State;

    fn insert(&self, state: &mut Self::State, e: usize);

    /// Writes `f_i(S)` for every task into `out` (length `num_tasks()`).
    fn task_values(&self, state: &Self::State, out: &mut [f64]);

    /// Writes `f_i(S + e)` for every task into `out`.
    fn task_values_with(&self, state: &Self::State, e: usize, out: &mut [f64]) {
        let mut next = state.clone();
        self.insert(&mut next, e);
        self.task_values(&next, out)
    }

    fn state_of(&self, set: &Subset) -> Self::State {
        let mut state = self.empty_state();
        for e in set.iter() {
            self.insert(&mut state, e);
        }
        state
    }

    fn evaluate(&self, set: &Subset) -> Vec<f64> {
        let mut out = vec![0.0; self.num_tasks()];
        self.task_values(&self.state_of(set), &mut out);
        out
    }
}

impl<T: TaskFamily + ?Sized> TaskFamily for &T {
    type State = T::State;

    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn num_tasks(&self) -> usize {
        (**self).num_tasks()
    }
    fn empty_state(&self) -> Self::State {
        (**self).empty_state()
    }
    fn insert(&self, state: &mut Self::State, e: usize) {
        (**self).insert(state, e)
    }
    fn task_values(&self, state: &Self::State, out: &mut [f64]) {
        (**self).task_values(state, out)
    }
    fn task_values_with(&self, state: &Self::State, e: usize, out: &mut [f64]) {
        (**self).task_values_with(state, e, out)
    }
}

/// A family built from homogeneous set functions.
#[derive(Clone, Debug)]
pub struct Tasks<F> {
    tasks: Vec<F>,
    ground_size: usize,
}

impl<F: SetFunction> Tasks<F> {
    pub fn new(tasks: Vec<F>) -> Result<Self> {
        let ground_size = tasks.first().ok_or_else(|| domain("a task family needs at least one task"))?.ground_size();
        if tasks.iter().any(|t| t.ground_size() != ground_size) {
            return Err(domain("all tasks must share the same ground set"));
        }
        if ground_size == 0 {
            return Err(domain("the ground set must be nonempty"));
        }
        Ok(Tasks { tasks, ground_size })
    }

    pub fn tasks(&self) -> &[F] {
        &self.tasks
    }
}

impl<F: SetFunction> TaskFamily for Tasks<F> {
    type State = Vec<F::State>;

    fn ground_size(&self) -> usize {
        self.ground_size
    }
    fn num_tasks(&self) -> usize {
        self.tasks.len()
    }
    fn empty_state(&self) -> Self::State {
        self.tasks.iter().map(SetFunction::empty_state).collect()
    }
    fn insert(&self, state: &mut Self::State, e: usize) {
        for (t, s) in self.tasks.iter().zip(state.iter_mut()) {
            t.insert(s, e);
        }
    }
    fn task_values(&self, state: &Self::State, out: &mut [f64]) {
        for ((t, s), o) in self.tasks.iter().zip(state).zip(out) {
            *o = t.value(s);
        }
    }
    fn task_values_with(&self, state: &Self::State, e: usize, out: &mut [f64]) {
        for ((t, s), o) in self.tasks.iter().zip(state).zip(out) {
            *o = t.value_with(s, e);
        }
    }
}

/// A single task of a family, viewed as a set function.
pub struct TaskOf<T> {
    family: T,
    task: usize,
}

impl<T: TaskFamily> TaskOf<T> {
    pub fn new(family: T, task: usize) -> Self {
        assert!(task < family.num_tasks(), "task index out of range");
        TaskOf { family, task }
    }
}

impl<T: TaskFamily> SetFunction for TaskOf<T> {
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
        out[self.task]
    }
    fn value_with(&self, state: &T::State, e: usize) -> f64 {
        let mut out = vec![0.0; self.family.num_tasks()];
        self.family.task_values_with(state, e, &mut out);
        out[self.task]
    }
}

/// How per-task values are combined into one objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AggregateMode {
    /// `sum_i Q_i f_i`
    WeightedAverage,
    /// `min_i f_i`
    WorstCase,
    /// `min_i (f_i - lambda Q_i)`
    ShiftedMin { lambda: f64 },
    /// `-lambda log sum_i Q_i exp(-f_i / lambda)`
    KlRobust { lambda: f64 },
}

impl AggregateMode {
    fn validate(&self) -> Result<()> {
        match *self {
            AggregateMode::ShiftedMin { lambda } | AggregateMode::KlRobust { lambda } if !(lambda > 0.0) => {
                Err(domain(format!("regularization weight must be positive, got {lambda}")))
            }
            _ => Ok(()),
        }
    }
}

/// Combines task values under `mode`.
pub fn aggregate(values: &[f64], q: &SimplexDistribution, mode: AggregateMode) -> Result<f64> {
    if values.len() != q.dim() {
        return Err(domain(format!(
            "family has {} tasks but the distribution has dimension {}",
            values.len(),
            q.dim()
        )));
    }
    mode.validate()?;
    Ok(match mode {
        AggregateMode::WeightedAverage => q.expectation(values),
        AggregateMode::WorstCase => values.iter().copied().fold(f64::INFINITY, f64::min),
        AggregateMode::ShiftedMin { lambda } => {
            values.iter().zip(q.weights()).map(|(f, w)| f - lambda * w).fold(f64::INFINITY, f64::min)
        }
        AggregateMode::KlRobust { lambda } => kl_robust_value(values, q, lambda)?,
    })
}

/// Aggregate objective of a family at `set`.
pub fn aggregate_value<T: TaskFamily>(
    family: &T,
    q: &SimplexDistribution,
    mode: AggregateMode,
    set: &Subset,
) -> Result<f64> {
    aggregate(&family.evaluate(set), q, mode)
}

/// A family's aggregate under a fixed mode and reference, as a set function.
pub struct AggregateObjective<T> {
    family: T,
    q: SimplexDistribution,
    mode: AggregateMode,
}

impl<T: TaskFamily> AggregateObjective<T> {
    pub fn new(family: T, q: SimplexDistribution, mode: AggregateMode) -> Result<Self> {
        if family.num_tasks() != q.dim() {
            return Err(domain(format!(
                "family has {} tasks but the distribution has dimension {}",
                family.num_tasks(),
                q.dim()
            )));
        }
        mode.validate()?;
        Ok(AggregateObjective { family, q, mode })
    }

    pub fn family(&self) -> &T {
        &self.family
    }

    fn combine(&self, values: &[f64]) -> f64 {
        aggregate(values, &self.q, self.mode).expect("validated at construction")
    }
}

impl<T: TaskFamily> SetFunction for AggregateObjective<T> {
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

/// `h = sum_i Q_i (1 - exp(-f_i / lambda))` on precomputed task values.
pub fn surrogate_h_of(values: &[f64], q: &SimplexDistribution, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(domain(format!("regularization weight must be positive, got {lambda}")));
    }
    if values.len() != q.dim() {
        return Err(domain("task values and distribution differ in dimension"));
    }
    Ok(values.iter().zip(q.weights()).map(|(f, w)| w * -(-f / lambda).exp_m1()).sum())
}

/// The submodular surrogate `h(S)`; the robust objective equals `link_g(h(S), lambda)`.
pub fn surrogate_h<T: TaskFamily>(family: &T, q: &SimplexDistribution, lambda: f64, set: &Subset) -> Result<f64> {
    surrogate_h_of(&family.evaluate(set), q, lambda)
}

/// `g(x) = -lambda log(1 - x)` on `[0, 1)`.
pub fn link_g(x: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(domain(format!("regularization weight must be positive, got {lambda}")));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(domain(format!("link argument must lie in [0, 1), got {x}")));
    }
    Ok(-lambda * (-x).ln_1p())
}

/// The surrogate `h` as a set function.
pub struct SurrogateH<T> {
    family: T,
    q: SimplexDistribution,
    lambda: f64,
}

impl<T: TaskFamily> SurrogateH<T> {
    pub fn new(family: T, q: SimplexDistribution, lambda: f64) -> Result<Self> {
        surrogate_h_of(&vec![0.0; family.num_tasks()], &q, lambda)?;
        Ok(SurrogateH { family, q, lambda })
    }
}

impl<T: TaskFamily> SetFunction for SurrogateH<T> {
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
        surrogate_h_of(&out, &self.q, self.lambda).expect("validated at construction")
    }
    fn value_with(&self, state: &T::State, e: usize) -> f64 {
        let mut out = vec![0.0; self.family.num_tasks()];
        self.family.task_values_with(state, e, &mut out);
        surrogate_h_of(&out, &self.q, self.lambda).expect("validated at construction")
    }
}

/// Result of a weak-submodularity-constant estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Wsc {
    /// Largest observed ratio `Δf(e|T) / Δf(e|S)`; `0` when every triple was `0/0`.
    Finite(f64),
    /// Some triple had a zero earlier gain and a nonzero later gain.
    Unbounded,
}

impl Wsc {
    pub fn is_finite(&self) -> bool {
        matches!(self, Wsc::Finite(_))
    }
}

/// How [`wsc_estimate`] enumerates triples `(S ⊆ T, e ∉ T)`.
#[derive(Clone, Copy, Debug)]
pub enum WscMode {
    /// Every triple; the ground set must have at most 14 elements.
    Exhaustive,
    /// `samples` random triples; yields a lower bound on the constant.
    Sampled { samples: usize, seed: u64 },
}

/// Gains with magnitude at most this are treated as zero.
pub const WSC_ZERO_TOLERANCE: f64 = 1e-12;

/// Estimates `max Δf(e|T) / Δf(e|S)` over `S ⊆ T`, `e ∉ T`. `0/0` triples are skipped.
pub fn wsc_estimate<F: SetFunction>(f: &F, mode: WscMode) -> Result<Wsc> {
    let n = f.ground_size();
    let mut tracker = WscTracker::default();
    match mode {
        WscMode::Exhaustive => {
            if n > 14 {
                return Err(domain(format!("exhaustive estimate needs at most 14 elements, got {n}")));
            }
            let table: Vec<f64> = (0u64..1 << n).map(|m| f.evaluate(&Subset::from_mask(n, m))).collect();
            let full = (1u64 << n) - 1;
            for e in 0..n {
                let bit = 1u64 << e;
                let rest = full & !bit;
                // Every T ⊆ N - {e}, then every S ⊆ T.
                let mut t = rest;
                loop {
                    let dt = table[(t | bit) as usize] - table[t as usize];
                    let mut s = t;
                    loop {
                        let ds = table[(s | bit) as usize] - table[s as usize];
                        tracker.observe(ds, dt, e)?;
                        if s == 0 {
                            break;
                        }
                        s = (s - 1) & t;
                    }
                    if t == 0 {
                        break;
                    }
                    t = (t - 1) & rest;
                }
            }
        }
        WscMode::Sampled { samples, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let elements: Vec<usize> = (0..n).collect();
            for _ in 0..samples {
                let &e = elements.choose(&mut rng).ok_or_else(|| domain("empty ground set"))?;
                let mut t = Subset::empty(n);
                let mut s = Subset::empty(n);
                for x in (0..n).filter(|&x| x != e) {
                    if rng.random_bool(0.5) {
                        t.insert(x);
                        if rng.random_bool(0.5) {
                            s.insert(x);
                        }
                    }
                }
                let ds = marginal_gain(f, e, &s)?;
                let dt = marginal_gain(f, e, &t)?;
                tracker.observe(ds, dt, e)?;
            }
        }
    }
    Ok(tracker.finish())
}

#[derive(Default)]
struct WscTracker {
    max_ratio: f64,
    unbounded: bool,
}

impl WscTracker {
    fn observe(&mut self, earlier: f64, later: f64, e: usize) -> Result<()> {
        if earlier < -WSC_ZERO_TOLERANCE || later < -WSC_ZERO_TOLERANCE {
            return Err(Error::Contract(format!(
                "function is not monotone: adding element {e} changes the value by {}",
                earlier.min(later)
            )));
        }
        let earlier_zero = earlier <= WSC_ZERO_TOLERANCE;
        let later_zero = later <= WSC_ZERO_TOLERANCE;
        match (earlier_zero, later_zero) {
            (true, true) => {}
            (true, false) => self.unbounded = true,
            (false, _) => self.max_ratio = self.max_ratio.max(later.max(0.0) / earlier),
        }
        Ok(())
    }

    fn finish(self) -> Wsc {
        if self.unbounded {
            Wsc::Unbounded
        } else {
            Wsc::Finite(self.max_ratio)
        }
    }
}
