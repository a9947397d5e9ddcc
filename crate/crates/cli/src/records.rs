//! Experiment records and their CSV form.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use robust_submod_core::Error;

use crate::error::{CliError, CliResult};

/// Utility weighted by the reference distribution.
pub const REFERENCE_UTILITY: u8 = 1;
/// Worst single-task utility.
pub const WORST_TASK: u8 = 2;
/// Utility under the local worst-case distribution.
pub const LOCAL_WORST_CASE: u8 = 3;
/// Solver wall time in seconds.
pub const WALL_TIME: u8 = 4;
/// Mean utility of the two tasks with the largest reference weight.
pub const TOP_TWO_TASKS: u8 = 5;
/// Distinct elements played so far in an online run.
pub const DISTINCT_ELEMENTS: u8 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    /// Stochastic greedy on the KL-robust objective.
    Local,
    /// Saturation on the worst case.
    Saturate,
    /// Stochastic greedy on the reference-weighted average.
    Reference,
    /// Saturation with a reference distribution.
    Preference,
    /// Online baseline solving every step on its own.
    Regular,
    /// Online window-robust play.
    Tr,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Local => "Local",
            Algorithm::Saturate => "Saturate",
            Algorithm::Reference => "Reference",
            Algorithm::Preference => "Preference",
            Algorithm::Regular => "Regular",
            Algorithm::Tr => "TR",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [
            Algorithm::Local,
            Algorithm::Saturate,
            Algorithm::Reference,
            Algorithm::Preference,
            Algorithm::Regular,
            Algorithm::Tr,
        ]
        .into_iter()
        .find(|a| a.label() == s)
        .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub run: usize,
    /// Time step, or the cardinality bound for suites without time.
    pub step: usize,
    pub algorithm: Algorithm,
    pub criterion: u8,
    pub value: f64,
}

impl ExperimentRecord {
    fn key(&self) -> (usize, usize, Algorithm, u8) {
        (self.run, self.step, self.algorithm, self.criterion)
    }
}

pub const CSV_HEADER: &str = "run,step,algorithm,criterion,value";

/// Writes `records` sorted by `(run, step, algorithm, criterion)`, values at 17 significant digits.
pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> CliResult<()> {
    if records.is_empty() {
        return Err(CliError::Config(format!("no records to write to {}", path.display())));
    }
    let mut sorted = records.to_vec();
    sorted.sort_by_key(ExperimentRecord::key);
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for r in &sorted {
        writeln!(out, "{},{},{},{},{:.16e}", r.run, r.step, r.algorithm, r.criterion, r.value)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> CliResult<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Format { row: 1, column: 1, message: format!("unexpected header {header:?}") }.into());
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let field = |j: usize| row.get(j).unwrap_or("");
        let bad = |j: usize| Error::Format { row: i + 2, column: j + 1, message: format!("bad field {:?}", field(j)) };
        records.push(ExperimentRecord {
            run: field(0).parse().map_err(|_| bad(0))?,
            step: field(1).parse().map_err(|_| bad(1))?,
            algorithm: field(2).parse().map_err(|_| bad(2))?,
            criterion: field(3).parse().map_err(|_| bad(3))?,
            value: field(4).parse().map_err(|_| bad(4))?,
        });
    }
    Ok(records)
}

/// Elements chosen by one algorithm at one step, in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionRecord {
    pub run: usize,
    pub step: usize,
    pub algorithm: Algorithm,
    pub elements: Vec<usize>,
}

pub const SELECTION_HEADER: &str = "run,step,algorithm,elements";

/// Writes selections sorted by `(run, step, algorithm)`; elements are space-separated.
pub fn write_selections(records: &[SelectionRecord], path: &Path) -> CliResult<()> {
    let mut sorted: Vec<&SelectionRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.run, r.step, r.algorithm));
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{SELECTION_HEADER}")?;
    for r in sorted {
        let elements: Vec<String> = r.elements.iter().map(ToString::to_string).collect();
        writeln!(out, "{},{},{},{}", r.run, r.step, r.algorithm, elements.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

/// Trailing mean over the last `min(window, i + 1)` points.
pub fn moving_average(series: &[f64], window: usize) -> CliResult<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::Domain("moving average of an empty series".into()).into());
    }
    if window == 0 {
        return Err(Error::Domain("moving-average window must be positive".into()).into());
    }
    Ok((0..series.len())
        .map(|i| {
            let tail = &series[(i + 1).saturating_sub(window)..=i];
            tail.iter().sum::<f64>() / tail.len() as f64
        })
        .collect())
}

/// Mean of the values matching `algorithm` and `criterion`.
pub fn mean_of(records: &[ExperimentRecord], algorithm: Algorithm, criterion: u8) -> Option<f64> {
    let vals: Vec<f64> =
        records.iter().filter(|r| r.algorithm == algorithm && r.criterion == criterion).map(|r| r.value).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}
