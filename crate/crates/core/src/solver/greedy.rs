use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{SampleSize, SolverResult};
use crate::error::{domain, Result};
use crate::objective::SetFunction;
use crate::subset::Subset;

/// Largest number of candidate sets [`brute_force`] will enumerate.
pub const BRUTE_FORCE_BUDGET: u64 = 1_000_000;

fn check_k<F: SetFunction>(f: &F, k: usize) -> Result<()> {
    if k > f.ground_size() {
        return Err(domain(format!("cardinality bound {k} exceeds the ground set size {}", f.ground_size())));
    }
    Ok(())
}

/// Selection state shared by the greedy variants.
pub(crate) struct Selection<F: SetFunction> {
    pub set: Subset,
    pub order: Vec<usize>,
    pub state: F::State,
    pub value: f64,
    pub evaluations: u64,
}

impl<F: SetFunction> Selection<F> {
    pub fn new(f: &F) -> Self {
        let state = f.empty_state();
        let value = f.value(&state);
        Selection { set: Subset::empty(f.ground_size()), order: Vec::new(), state, value, evaluations: 1 }
    }

    pub fn add(&mut self, f: &F, e: usize, value: f64) {
        f.insert(&mut self.state, e);
        self.set.insert(e);
        self.order.push(e);
        self.value = value;
    }

    /// Best `(element, value of S + e)` among `candidates`, lowest index on ties.
    pub fn best_of(&mut self, f: &F, candidates: impl Iterator<Item = usize>) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for e in candidates {
            let v = f.value_with(&self.state, e);
            self.evaluations += 1;
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((e, v));
            }
        }
        best
    }

    pub fn into_result(self, started: Instant, seed: u64) -> SolverResult {
        SolverResult {
            selection: self.set,
            order: self.order,
            objective_value: self.value,
            evaluations: self.evaluations,
            wall_time: started.elapsed().as_secs_f64(),
            seed,
        }
    }
}

/// Exact greedy: `k` rounds of the largest marginal gain; stops early once no
/// remaining element has a positive gain.
pub fn greedy<F: SetFunction>(f: &F, k: usize) -> Result<SolverResult> {
    check_k(f, k)?;
    let started = Instant::now();
    let mut sel = Selection::new(f);
    for _ in 0..k {
        let candidates: Vec<usize> = sel.set.complement().collect();
        match sel.best_of(f, candidates.into_iter()) {
            Some((e, v)) if v - sel.value > 0.0 => sel.add(f, e, v),
            _ => break,
        }
    }
    Ok(sel.into_result(started, 0))
}

#[derive(Clone, Copy)]
struct Bound {
    gain: f64,
    value: f64,
    element: usize,
    round: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    // Max-heap on gain; among equal gains the lower element index comes first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then(other.element.cmp(&self.element))
    }
}

/// Greedy with lazily refreshed upper bounds on marginal gains, run until
/// `stop(value, size)` holds, no positive gain remains, or `max_size` elements
/// are selected. Matches [`greedy`] on submodular functions.
pub(crate) fn lazy_run<F: SetFunction>(f: &F, max_size: usize, stop: impl Fn(f64) -> bool) -> Selection<F> {
    let mut sel = Selection::new(f);
    if stop(sel.value) {
        return sel;
    }
    let mut heap: BinaryHeap<Bound> = (0..f.ground_size())
        .map(|e| {
            let v = f.value_with(&sel.state, e);
            sel.evaluations += 1;
            Bound { gain: v - sel.value, value: v, element: e, round: 0 }
        })
        .collect();
    let mut round = 0;
    while sel.order.len() < max_size {
        let Some(top) = heap.pop() else { break };
        if top.round == round {
            if top.gain <= 0.0 {
                break;
            }
            sel.add(f, top.element, top.value);
            round += 1;
            if stop(sel.value) {
                break;
            }
        } else {
            let v = f.value_with(&sel.state, top.element);
            sel.evaluations += 1;
            heap.push(Bound { gain: v - sel.value, value: v, element: top.element, round });
        }
    }
    sel
}

/// Lazy greedy (priority queue of stale gains). Identical selections to
/// [`greedy`] for submodular `f`; a heuristic otherwise.
pub fn lazy_greedy<F: SetFunction>(f: &F, k: usize) -> Result<SolverResult> {
    check_k(f, k)?;
    let started = Instant::now();
    Ok(lazy_run(f, k, |_| false).into_result(started, 0))
}

/// Stochastic greedy: each round scans a uniform sample (without replacement)
/// of the unselected elements and adds the sample's best element.
pub fn stochastic_greedy<F: SetFunction>(f: &F, k: usize, sample: SampleSize, seed: u64) -> Result<SolverResult> {
    check_k(f, k)?;
    if let SampleSize::Epsilon(eps) = sample {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(domain(format!("epsilon must lie in (0, 1), got {eps}")));
        }
    }
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = sample.per_round(f.ground_size(), k);
    let mut sel = Selection::new(f);
    for _ in 0..k {
        let remaining: Vec<usize> = sel.set.complement().collect();
        if remaining.is_empty() {
            break;
        }
        let exhaustive = r >= remaining.len();
        let candidates = if exhaustive {
            remaining
        } else {
            let mut picked: Vec<usize> =
                rand::seq::index::sample(&mut rng, remaining.len(), r).into_iter().map(|i| remaining[i]).collect();
            picked.sort_unstable();
            picked
        };
        match sel.best_of(f, candidates.into_iter()) {
            Some((e, v)) if v - sel.value > 0.0 => sel.add(f, e, v),
            _ if exhaustive => break,
            _ => {}
        }
    }
    Ok(sel.into_result(started, seed))
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul((n - i) as u64) / (i as u64 + 1))
}

/// Exhaustive maximization over all sets of size exactly `k` (enough for
/// monotone `f`); the lexicographically smallest maximizer wins ties.
pub fn brute_force<F: SetFunction>(f: &F, k: usize) -> Result<SolverResult> {
    check_k(f, k)?;
    let n = f.ground_size();
    let count = binomial(n, k);
    if count > BRUTE_FORCE_BUDGET {
        return Err(domain(format!("C({n}, {k}) = {count} exceeds the enumeration budget")));
    }
    let started = Instant::now();
    let mut combo: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut evaluations = 0;
    loop {
        let v = f.evaluate(&Subset::from_indices(n, combo.iter().copied()));
        evaluations += 1;
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((combo.clone(), v));
        }
        // Next combination in lexicographic order.
        let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else { break };
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
    let (order, value) = best.expect("at least one combination");
    Ok(SolverResult {
        selection: Subset::from_indices(n, order.iter().copied()),
        order,
        objective_value: value,
        evaluations,
        wall_time: started.elapsed().as_secs_f64(),
        seed: 0,
    })
}
