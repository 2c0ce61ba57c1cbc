//! Exponentiated-distance similarity over a sentence embedding cloud.
//!
//! `sim(x, y) = exp(-beta * |e(x) - e(y)|)` where `beta` is the inverse of
//! the mean Euclidean distance over all ordered pairs of distinct positions.
//! Multiplying every embedding by `c > 0` scales distances by `c` and `beta`
//! by `1/c`, so the similarity (and anything built on it) is unchanged.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::corpus::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Euclidean distance: squared differences accumulated in order, one sqrt.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Sums after sorting ascending, so the result depends only on the multiset
/// of values. Rows that hold the same similarities in a different order
/// (mirror-image points, for instance) get bit-identical totals, which keeps
/// exact ties exact for index tie-breaking.
pub(crate) fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

/// Inverse mean pairwise distance over the embedding cloud.
pub fn compute_beta(emb: &EmbeddingMatrix) -> Result<f64> {
    let n = emb.rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "beta needs at least two embeddings, got {n}"
        )));
    }
    // Unordered pairs, each counted once; the ordered-pair sum is twice this.
    let partials: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ei = emb.row(i);
            (i + 1..n).map(|j| euclidean(ei, emb.row(j))).sum::<f64>()
        })
        .collect();
    let total: f64 = partials.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateCloud);
    }
    let mean = 2.0 * total / (n as f64 * (n as f64 - 1.0));
    Ok(1.0 / mean)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum StorageMode {
    /// Materialize the full `n x n` matrix.
    #[default]
    Dense,
    /// Keep only the embeddings and coverage totals; rows are recomputed.
    Lean,
}

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<f64>),
    Lean(EmbeddingMatrix),
}

/// Similarity values plus the per-sentence coverage totals
/// `sum_y sim(s, y)` over the whole ground set.
///
/// Both storage modes produce bit-identical similarities and totals.
#[derive(Debug, Clone)]
pub struct SimilarityModel {
    beta: Option<f64>,
    n: usize,
    storage: Storage,
    coverage: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl SimilarityModel {
    pub fn build(emb: &EmbeddingMatrix) -> Result<Self> {
        Self::build_with(emb, StorageMode::Dense)
    }

    pub fn build_with(emb: &EmbeddingMatrix, mode: StorageMode) -> Result<Self> {
        let n = emb.rows();
        if n == 0 {
            return Err(Error::EmptyCorpus);
        }
        // A single sentence has no pairwise distances; its only similarity is
        // with itself.
        let beta = if n == 1 {
            None
        } else {
            Some(compute_beta(emb)?)
        };
        let b = beta.unwrap_or(1.0);

        let row = |i: usize| -> Vec<f64> {
            let ei = emb.row(i);
            (0..n)
                .map(|j| (-b * euclidean(ei, emb.row(j))).exp())
                .collect()
        };

        let (storage, coverage) = match mode {
            StorageMode::Dense => {
                let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(row).collect();
                let coverage = rows
                    .par_iter()
                    .map(|r| canonical_sum(&mut r.clone()))
                    .collect();
                (Storage::Dense(rows.concat()), coverage)
            }
            StorageMode::Lean => {
                let coverage = (0..n)
                    .into_par_iter()
                    .map(|i| canonical_sum(&mut row(i)))
                    .collect();
                (Storage::Lean(emb.clone()), coverage)
            }
        };
        Ok(SimilarityModel {
            beta,
            n,
            storage,
            coverage,
        })
    }

    /// `None` only for a single-sentence ground set.
    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mode(&self) -> StorageMode {
        match self.storage {
            Storage::Dense(_) => StorageMode::Dense,
            Storage::Lean(_) => StorageMode::Lean,
        }
    }

    pub fn coverage_totals(&self) -> &[f64] {
        &self.coverage
    }

    pub fn sim(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m[i * self.n + j],
            Storage::Lean(emb) => {
                (-self.beta.unwrap_or(1.0) * euclidean(emb.row(i), emb.row(j))).exp()
            }
        }
    }

    /// Row `i` of the similarity matrix.
    pub fn row(&self, i: usize) -> Cow<'_, [f64]> {
        match &self.storage {
            Storage::Dense(m) => Cow::Borrowed(&m[i * self.n..(i + 1) * self.n]),
            Storage::Lean(_) => Cow::Owned((0..self.n).map(|j| self.sim(i, j)).collect()),
        }
    }

    /// The `m` sentences most similar to `s` (excluding `s`), sorted by
    /// descending similarity then ascending index.
    pub fn nearest_neighbors(&self, s: usize, m: usize) -> Result<Vec<(usize, f64)>> {
        if s >= self.n {
            return Err(Error::InvalidArgument(format!(
                "sentence index {s} out of range for {} sentences",
                self.n
            )));
        }
        if m == 0 || m >= self.n {
            return Err(Error::InvalidArgument(format!(
                "neighbor count must be in 1..={}, got {m}",
                self.n.saturating_sub(1)
            )));
        }
        let row = self.row(s);
        let mut out: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != s)
            .map(|(j, &v)| (j, v))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out.truncate(m);
        Ok(out)
    }

    /// Mean, min and max over off-diagonal entries; `None` when `n == 1`.
    pub fn off_diagonal_stats(&self) -> Option<SimilarityStats> {
        if self.n < 2 {
            return None;
        }
        let per_row: Vec<(f64, f64, f64)> = (0..self.n)
            .into_par_iter()
            .map(|i| {
                let row = self.row(i);
                row.iter().enumerate().filter(|&(j, _)| j != i).fold(
                    (0.0, f64::INFINITY, f64::NEG_INFINITY),
                    |(s, lo, hi), (_, &v)| (s + v, lo.min(v), hi.max(v)),
                )
            })
            .collect();
        let (sum, min, max) = per_row.iter().fold(
            (0.0, f64::INFINITY, f64::NEG_INFINITY),
            |(s, lo, hi), &(rs, rl, rh)| (s + rs, lo.min(rl), hi.max(rh)),
        );
        Some(SimilarityStats {
            mean: sum / (self.n * (self.n - 1)) as f64,
            min,
            max,
        })
    }
}
