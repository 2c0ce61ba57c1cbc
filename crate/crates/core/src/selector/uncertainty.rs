//! Uncertainty-driven batch selection for the active-learning baselines.
//!
//! Per-token confidences come from an external tagger as JSON lines,
//! `{"index": i, "token_probs": [p1, ..., pk]}`; a sentence's uncertainty is
//! its mean least confidence `(1/k) * sum(1 - p_i)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyRecord {
    pub index: usize,
    pub token_probs: Vec<f64>,
}

/// Uncertainty records keyed by sentence index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UncertaintySet {
    records: BTreeMap<usize, Vec<f64>>,
}

impl UncertaintySet {
    pub fn new(records: impl IntoIterator<Item = UncertaintyRecord>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for r in records {
            if let Some(p) = r.token_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidArgument(format!(
                    "sentence {}: probability {p} outside [0, 1]",
                    r.index
                )));
            }
            if map.insert(r.index, r.token_probs).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate uncertainty record for sentence {}",
                    r.index
                )));
            }
        }
        Ok(UncertaintySet { records: map })
    }

    /// Parses JSON lines; blank lines are skipped.
    pub fn parse_jsonl(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: UncertaintyRecord = serde_json::from_str(line)
                .map_err(|e| Error::parse("uncertainty", i + 1, e.to_string()))?;
            records.push(rec);
        }
        UncertaintySet::new(records)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_jsonl(&text)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (&index, probs) in &self.records {
            let rec = UncertaintyRecord {
                index,
                token_probs: probs.clone(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("serializable record"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&[f64]> {
        self.records.get(&index).map(Vec::as_slice)
    }

    /// Checks every record against the corpus: index in range and one
    /// probability per token.
    pub fn validate_against(&self, corpus: &Corpus) -> Result<()> {
        for (&index, probs) in &self.records {
            let s = corpus.get(index).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "uncertainty record for sentence {index}, corpus has {}",
                    corpus.len()
                ))
            })?;
            if s.len() != probs.len() {
                return Err(Error::InvalidArgument(format!(
                    "sentence {index} has {} tokens but {} probabilities",
                    s.len(),
                    probs.len()
                )));
            }
        }
        Ok(())
    }

    /// `(index, u)` for every record not in `exclude`, in index order.
    fn candidates(&self, exclude: &BTreeSet<usize>, batch: usize) -> Result<Vec<(usize, f64)>> {
        if batch == 0 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        let out = self
            .records
            .iter()
            .filter(|(i, _)| !exclude.contains(i))
            .map(|(&i, p)| sentence_uncertainty(p).map(|u| (i, u)))
            .collect::<Result<Vec<_>>>()?;
        if out.len() < batch {
            return Err(Error::InvalidArgument(format!(
                "batch of {batch} requested but only {} candidates remain",
                out.len()
            )));
        }
        Ok(out)
    }
}

/// Mean least confidence over the tokens of one sentence.
pub fn sentence_uncertainty(token_probs: &[f64]) -> Result<f64> {
    if token_probs.is_empty() {
        return Err(Error::InvalidArgument(
            "uncertainty of a sentence with no token probabilities".into(),
        ));
    }
    let total: f64 = token_probs.iter().map(|p| 1.0 - p).sum();
    Ok(total / token_probs.len() as f64)
}

/// Classic active learning: the `batch` most uncertain remaining sentences,
/// ties by ascending index.
pub fn select_batch_alc(
    set: &UncertaintySet,
    exclude: &BTreeSet<usize>,
    batch: usize,
) -> Result<Vec<usize>> {
    let mut cands = set.candidates(exclude, batch)?;
    cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(cands.into_iter().take(batch).map(|(i, _)| i).collect())
}

/// Randomized active learning: `batch` distinct sentences drawn one at a
/// time, each with probability proportional to its uncertainty among those
/// still available. Returned in draw order.
pub fn select_batch_alr(
    set: &UncertaintySet,
    exclude: &BTreeSet<usize>,
    batch: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let mut cands = set.candidates(exclude, batch)?;
    let mut rng = SeededRng::new(seed);
    let mut picked = Vec::with_capacity(batch);
    for _ in 0..batch {
        let total: f64 = cands.iter().map(|c| c.1).sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument(
                "all remaining candidates have zero uncertainty; sampling weights undefined".into(),
            ));
        }
        let target = rng.next_f64() * total;
        let mut acc = 0.0;
        let mut pos = None;
        for (k, &(_, u)) in cands.iter().enumerate() {
            acc += u;
            if target < acc {
                pos = Some(k);
                break;
            }
        }
        // Rounding can leave `target` just past the final partial sum.
        let pos = pos.unwrap_or_else(|| {
            cands
                .iter()
                .rposition(|c| c.1 > 0.0)
                .expect("positive total implies a positive weight")
        });
        picked.push(cands.remove(pos).0);
    }
    Ok(picked)
}

/// Parses an exclude file: one sentence index per line, blank lines ignored.
pub fn parse_exclude(text: &str) -> Result<BTreeSet<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| Error::parse("exclude", i + 1, format!("'{l}' is not an index")))
        })
        .collect()
}
