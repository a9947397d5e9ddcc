//! The experiment suites.
//!
//! Run `r` of a suite is seeded with `seed + r`; every random stream inside
//! the run is derived from that seed, so a run reproduces on its own.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust_submod_core::imgsum::{distance_matrix, image_task_family, load_embeddings, synthetic_embeddings};
use robust_submod_core::satsim::{SatScenario, SatStepFamily};
use robust_submod_core::solver::{
    derive_seed, online_per_step, online_tr_driver, saturate_with_preference, ssa_to_resolution, stochastic_greedy,
    CoverStrategy, OnlineConfig, OnlineStep, SaturationConfig,
};
use robust_submod_core::{AggregateMode, AggregateObjective, SimplexDistribution, SolverResult, Subset, TaskFamily};

use crate::config::{ExperimentConfig, Suite};
use crate::criteria::evaluate_criteria;
use crate::error::{CliError, CliResult};
use crate::records::{
    write_csv, write_selections, Algorithm, ExperimentRecord, SelectionRecord, DISTINCT_ELEMENTS, LOCAL_WORST_CASE,
    REFERENCE_UTILITY, TOP_TWO_TASKS, WALL_TIME, WORST_TASK,
};
use crate::verify::run_verify;

const Q_STREAM: u64 = 0x51;
const TR_STREAM: u64 = 0x7452;
const REGULAR_STREAM: u64 = 0x5245;
const STEP_STREAM: u64 = 0x1000;

#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub records: Vec<ExperimentRecord>,
    pub selections: Vec<SelectionRecord>,
    pub files: Vec<PathBuf>,
}

#[derive(Default)]
struct Sink {
    records: Vec<ExperimentRecord>,
    selections: Vec<SelectionRecord>,
}

impl Sink {
    fn select(&mut self, (run, step, algorithm): (usize, usize, Algorithm), selection: &Subset) {
        self.selections.push(SelectionRecord { run, step, algorithm, elements: selection.to_vec() });
    }
}

/// Runs every configured run of the suite and writes its CSV files.
///
/// Each algorithm gets `<suite>_<algorithm>.csv` with the deterministic
/// criteria and `<suite>_<algorithm>_time.csv` with the wall times; the
/// selected sets go to `<suite>_selections.csv`.
pub fn run_suite(config: &ExperimentConfig) -> CliResult<SuiteOutput> {
    config.validate()?;
    let suite = config.suite()?;
    let mut sink = Sink::default();
    if suite == Suite::Verify {
        let report = run_verify(config.quick);
        return if report.passed() { Ok(SuiteOutput::default()) } else { Err(CliError::Violation(report.failures())) };
    }
    for run in 0..config.runs {
        let seed = config.seed.wrapping_add(run as u64);
        match suite {
            Suite::Satsel => satsel_run(config, run, seed, &mut sink)?,
            Suite::Swp => swp_run(config, run, seed, &mut sink)?,
            Suite::Online => online_run(config, run, seed, &mut sink)?,
            Suite::Imgsum => imgsum_run(config, run, seed, &mut sink)?,
            Suite::Verify => unreachable!(),
        }
    }
    let files = write_suite_files(config, suite, &sink)?;
    Ok(SuiteOutput { records: sink.records, selections: sink.selections, files })
}

fn write_suite_files(config: &ExperimentConfig, suite: Suite, sink: &Sink) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(&config.out_dir)?;
    let mut groups: BTreeMap<(Algorithm, bool), Vec<ExperimentRecord>> = BTreeMap::new();
    for r in &sink.records {
        groups.entry((r.algorithm, r.criterion == WALL_TIME)).or_default().push(*r);
    }
    let mut files = Vec::new();
    for ((algorithm, timing), group) in groups {
        let suffix = if timing { "_time" } else { "" };
        let path = config.out_dir.join(format!("{suite}_{algorithm}{suffix}.csv"));
        write_csv(&group, &path)?;
        files.push(path);
    }
    let path = config.out_dir.join(format!("{suite}_selections.csv"));
    write_selections(&sink.selections, &path)?;
    files.push(path);
    Ok(files)
}

fn reference_distribution(seed: u64, tasks: usize) -> CliResult<SimplexDistribution> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, Q_STREAM));
    Ok(SimplexDistribution::sample_uniform(tasks, &mut rng)?)
}

fn scenario(config: &ExperimentConfig, seed: u64) -> CliResult<SatScenario> {
    Ok(SatScenario::new(config.scenario.scenario(seed))?)
}

fn push_criteria<T: TaskFamily>(
    out: &mut Sink,
    (run, step, algorithm): (usize, usize, Algorithm),
    family: &T,
    q: &SimplexDistribution,
    lambda: f64,
    result: &SolverResult,
) -> CliResult<Vec<f64>> {
    let c = evaluate_criteria(family, q, lambda, &result.selection, result.wall_time)?;
    for (criterion, value) in [
        (REFERENCE_UTILITY, c.reference),
        (WORST_TASK, c.worst_task),
        (LOCAL_WORST_CASE, c.local_worst_case),
        (WALL_TIME, c.elapsed),
    ] {
        out.records.push(ExperimentRecord { run, step, algorithm, criterion, value });
    }
    out.select((run, step, algorithm), &result.selection);
    Ok(family.evaluate(&result.selection))
}

fn local(
    family: &SatStepFamily,
    q: &SimplexDistribution,
    config: &ExperimentConfig,
    seed: u64,
) -> CliResult<SolverResult> {
    let s = &config.solver;
    let objective = AggregateObjective::new(family, q.clone(), AggregateMode::KlRobust { lambda: s.lambda })?;
    Ok(stochastic_greedy(&objective, s.k, s.sample(), seed)?)
}

fn satsel_run(config: &ExperimentConfig, run: usize, seed: u64, out: &mut Sink) -> CliResult<()> {
    let s = &config.solver;
    let mut sc = scenario(config, seed)?;
    let q = reference_distribution(seed, sc.config().sensing_tasks + 1)?;
    for step in 0..config.scenario.steps {
        let family = sc.family();
        let step_seed = derive_seed(seed, STEP_STREAM + step as u64);
        let local = local(&family, &q, config, step_seed)?;
        let saturate = ssa_to_resolution(&family, s.k, s.alpha, CoverStrategy::Exact, s.resolution)?;
        let avg = AggregateObjective::new(&family, q.clone(), AggregateMode::WeightedAverage)?;
        let reference = stochastic_greedy(&avg, s.k, s.sample(), step_seed)?;
        for (alg, res) in
            [(Algorithm::Local, &local), (Algorithm::Saturate, &saturate), (Algorithm::Reference, &reference)]
        {
            push_criteria(out, (run, step, alg), &family, &q, s.lambda, res)?;
        }
        sc.advance(&Subset::full(family.ground_size()))?;
    }
    Ok(())
}

fn swp_run(config: &ExperimentConfig, run: usize, seed: u64, out: &mut Sink) -> CliResult<()> {
    let s = &config.solver;
    let mut sc = scenario(config, seed)?;
    let q = reference_distribution(seed, sc.config().sensing_tasks + 1)?;
    let top = q.top_indices(2);
    let pref =
        SaturationConfig { alpha: s.alpha, resolution: s.resolution, ..SaturationConfig::new(s.lambda, q.clone()) };
    for step in 0..config.scenario.steps {
        let family = sc.family();
        let preference = saturate_with_preference(&family, s.k, &pref)?;
        let saturate = ssa_to_resolution(&family, s.k, s.alpha, CoverStrategy::Exact, s.resolution)?;
        for (alg, res) in [(Algorithm::Preference, &preference), (Algorithm::Saturate, &saturate)] {
            let values = push_criteria(out, (run, step, alg), &family, &q, s.lambda, res)?;
            let value = top.iter().map(|&i| values[i]).sum::<f64>() / top.len() as f64;
            out.records.push(ExperimentRecord { run, step, algorithm: alg, criterion: TOP_TWO_TASKS, value });
        }
        sc.advance(&Subset::full(family.ground_size()))?;
    }
    Ok(())
}

fn online_run(config: &ExperimentConfig, run: usize, seed: u64, out: &mut Sink) -> CliResult<()> {
    let s = &config.solver;
    let mut sc = scenario(config, seed)?;
    let q = reference_distribution(seed, sc.config().sensing_tasks + 1)?;
    let mut stream = Vec::with_capacity(config.scenario.steps);
    for _ in 0..config.scenario.steps {
        let family = sc.family();
        let n = family.ground_size();
        stream.push(AggregateObjective::new(family, q.clone(), AggregateMode::WeightedAverage)?);
        sc.advance(&Subset::full(n))?;
    }
    let tr_config = OnlineConfig {
        window: s.window,
        gamma: s.gamma,
        lambda: s.lambda,
        k: s.k,
        sample: s.sample(),
        seed: derive_seed(seed, TR_STREAM),
    };
    let tr = online_tr_driver(&stream, &tr_config)?;
    let regular = online_per_step(&stream, s.k, s.sample(), derive_seed(seed, REGULAR_STREAM))?;
    for (algorithm, steps) in [(Algorithm::Tr, &tr), (Algorithm::Regular, &regular)] {
        for (step, st) in steps.iter().enumerate() {
            let OnlineStep { ref played, utility, distinct, solve_time, .. } = *st;
            for (criterion, value) in
                [(REFERENCE_UTILITY, utility), (WALL_TIME, solve_time), (DISTINCT_ELEMENTS, distinct as f64)]
            {
                out.records.push(ExperimentRecord { run, step, algorithm, criterion, value });
            }
            out.select((run, step, algorithm), played);
        }
    }
    Ok(())
}

fn imgsum_run(config: &ExperimentConfig, run: usize, seed: u64, out: &mut Sink) -> CliResult<()> {
    let s = &config.solver;
    let m = &config.imgsum;
    let embeddings = match &m.embeddings {
        Some(path) => load_embeddings(path)?,
        None => synthetic_embeddings(m.images, m.dim, seed)?,
    };
    let family = image_task_family(distance_matrix(&embeddings)?);
    let q = SimplexDistribution::uniform(family.num_tasks())?;
    for &k in &m.k_values {
        if k > family.ground_size() {
            return Err(CliError::Config(format!("k = {k} exceeds the {} images", family.ground_size())));
        }
        let objective = AggregateObjective::new(&family, q.clone(), AggregateMode::KlRobust { lambda: s.lambda })?;
        let local = stochastic_greedy(&objective, k, s.sample(), derive_seed(seed, STEP_STREAM + k as u64))?;
        let saturate = ssa_to_resolution(&family, k, s.alpha, CoverStrategy::Lazy, s.resolution)?;
        for (alg, res) in [(Algorithm::Local, &local), (Algorithm::Saturate, &saturate)] {
            push_criteria(out, (run, k, alg), &family, &q, s.lambda, res)?;
        }
    }
    Ok(())
}
