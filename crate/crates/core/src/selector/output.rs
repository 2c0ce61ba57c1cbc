//! Ranking file format.
//!
//! ```text
//! # strategy=ratio-penalty seed=none beta=0.15 n=3
//! 1   1   1.9447...
//! 2   0   1.1515...
//! ```
//!
//! Extra `# key=value` header lines carry `alpha` for linear-penalty and
//! the generator name for random. Rows are `rank<TAB>sentence_index<TAB>score`
//! with 1-based ranks. Floats use Rust's shortest round-trip formatting.

use std::collections::BTreeMap;

use super::{Ranking, Strategy};
use crate::error::{Error, Result};
use crate::rng::PRNG_NAME;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn write_ranking(ranking: &Ranking, beta: Option<f64>) -> String {
    let strategy = ranking.strategy();
    let mut out = format!(
        "# strategy={} seed={} beta={} n={}\n",
        strategy.kind(),
        opt(strategy.seed()),
        opt(beta),
        ranking.len()
    );
    match strategy {
        Strategy::LinearPenalty { alpha } => out.push_str(&format!("# alpha={alpha}\n")),
        Strategy::Random { .. } => out.push_str(&format!("# prng={PRNG_NAME}\n")),
        _ => {}
    }
    for (r, (idx, score)) in ranking.order().iter().zip(ranking.scores()).enumerate() {
        out.push_str(&format!("{}\t{idx}\t{score}\n", r + 1));
    }
    out
}

/// A ranking file read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingFile {
    pub meta: BTreeMap<String, String>,
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
}

pub fn parse_ranking(text: &str) -> Result<RankingFile> {
    const WHAT: &str = "ranking";
    let mut meta = BTreeMap::new();
    let mut order = Vec::new();
    let mut scores = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(header) = line.strip_prefix('#') {
            for kv in header.split_ascii_whitespace() {
                let (k, v) = kv.split_once('=').ok_or_else(|| {
                    Error::parse(WHAT, lineno, format!("bad header field '{kv}'"))
                })?;
                meta.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [rank, idx, score] = fields.as_slice() else {
            return Err(Error::parse(
                WHAT,
                lineno,
                "expected rank<TAB>index<TAB>score",
            ));
        };
        let rank: usize = rank
            .parse()
            .map_err(|_| Error::parse(WHAT, lineno, format!("bad rank '{rank}'")))?;
        if rank != order.len() + 1 {
            return Err(Error::parse(
                WHAT,
                lineno,
                format!("rank {rank} out of sequence, expected {}", order.len() + 1),
            ));
        }
        order.push(
            idx.parse()
                .map_err(|_| Error::parse(WHAT, lineno, format!("bad index '{idx}'")))?,
        );
        scores.push(
            score
                .parse()
                .map_err(|_| Error::parse(WHAT, lineno, format!("bad score '{score}'")))?,
        );
    }
    if let Some(n) = meta.get("n") {
        if n.parse::<usize>().ok() != Some(order.len()) {
            return Err(Error::parse(
                WHAT,
                1,
                format!("header n={n} but {} rows", order.len()),
            ));
        }
    }
    Ok(RankingFile {
        meta,
        order,
        scores,
    })
}
