//! Image summarization: every image is a task that scores a summary by its
//! similarity to the closest selected image.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::objective::TaskFamily;

/// Row-major matrix of image embeddings, one image per row.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || dim == 0 {
            return Err(domain("embeddings need at least one row and one column"));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::Format {
                    row: i + 1,
                    column: r.len().min(dim) + 1,
                    message: format!("expected {dim} columns, found {}", r.len()),
                });
            }
            if r.iter().all(|&x| x == 0.0) {
                return Err(Error::Format { row: i + 1, column: 1, message: "zero-norm embedding".into() });
            }
            data.extend_from_slice(r);
        }
        Ok(EmbeddingMatrix { rows: rows.len(), dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Writes a headerless CSV that [`load_embeddings`] reads back bit-exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(f64::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads a headerless CSV of decimal floats, one embedding per row.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Format { row: 0, column: 0, message: format!("cannot read {}: {e}", path.display()) })?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format { row: i + 1, column: 0, message: e.to_string() })?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, tok)| {
                tok.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::Format {
                    row: i + 1,
                    column: j + 1,
                    message: format!("not a finite number: {tok:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    EmbeddingMatrix::new(rows).map_err(|e| match e {
        Error::Domain(m) => Error::Format { row: 0, column: 0, message: m },
        other => other,
    })
}

/// Seeded Gaussian rows scaled to unit norm.
pub fn synthetic_embeddings(count: usize, dim: usize, seed: u64) -> Result<EmbeddingMatrix> {
    if count == 0 || dim == 0 {
        return Err(domain("count and dimension must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect();
    EmbeddingMatrix::new(rows)
}

/// Symmetric dissimilarities in `[0, 1]` with zero diagonal.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for i in 0..self.n {
            let line: Vec<String> = self.row(i).iter().map(|d| format!("{d:.16e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Min-max normalized cosine dissimilarity:
/// `d(i, e) = (s_max - s(i, e)) / (s_max - s_min)` over off-diagonal
/// similarities, with `d(i, i) = 0`.
pub fn distance_matrix(e: &EmbeddingMatrix) -> Result<DistanceMatrix> {
    let n = e.rows();
    if n < 2 {
        return Err(domain("at least two embeddings are needed for pairwise distances"));
    }
    let norms: Vec<f64> = (0..n).map(|i| e.row(i).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut sim = vec![0.0; n * n];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let dot: f64 = e.row(i).iter().zip(e.row(j)).map(|(a, b)| a * b).sum();
            let s = dot / (norms[i] * norms[j]);
            sim[i * n + j] = s;
            sim[j * n + i] = s;
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    let span = hi - lo;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                data[i * n + j] = if span > 0.0 { ((hi - sim[i * n + j]) / span).clamp(0.0, 1.0) } else { 0.0 };
            }
        }
    }
    Ok(DistanceMatrix { n, data })
}

/// Task `i` scores `S` as `1 - min_{e in S} d(i, e)`, and the empty set as 0.
#[derive(Clone, Debug)]
pub struct FacilityLocation {
    dist: DistanceMatrix,
}

/// Per-task closest selected distance (1 when nothing is selected).
#[derive(Clone, Debug)]
pub struct FacilityState {
    closest: Vec<f64>,
}

pub fn image_task_family(dist: DistanceMatrix) -> FacilityLocation {
    FacilityLocation { dist }
}

impl FacilityLocation {
    pub fn distances(&self) -> &DistanceMatrix {
        &self.dist
    }
}

impl TaskFamily for FacilityLocation {
    type State = FacilityState;

    fn ground_size(&self) -> usize {
        self.dist.n
    }
    fn num_tasks(&self) -> usize {
        self.dist.n
    }
    fn empty_state(&self) -> FacilityState {
        FacilityState { closest: vec![1.0; self.dist.n] }
    }
    fn insert(&self, state: &mut FacilityState, e: usize) {
        // d is symmetric, so column e is row e.
        for (c, &d) in state.closest.iter_mut().zip(self.dist.row(e)) {
            *c = c.min(d);
        }
    }
    fn task_values(&self, state: &FacilityState, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&state.closest) {
            *o = 1.0 - c;
        }
    }
    fn task_values_with(&self, state: &FacilityState, e: usize, out: &mut [f64]) {
        for ((o, c), &d) in out.iter_mut().zip(&state.closest).zip(self.dist.row(e)) {
            *o = 1.0 - c.min(d);
        }
    }
}
