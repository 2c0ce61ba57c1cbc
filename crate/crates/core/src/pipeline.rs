//! End-to-end runs: load inputs, rank with every configured strategy, and
//! export rankings, k-prefix training subsets and a checksummed manifest.
//!
//! Output layout under the run's output directory:
//!
//! ```text
//! manifest.json
//! rankings/<label>.tsv
//! subsets/<label>/k<k>.conll      (k<k>.txt for untagged corpora)
//! projection.tsv                  (only when `projection_top` is set)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{
    load_corpus, load_embeddings, validate_pair, write_conll, write_plain, Corpus, CorpusFormat,
    EmbeddingMatrix,
};
use crate::error::{Error, Result};
use crate::rng::PRNG_NAME;
use crate::selector::{write_ranking, Ranking, Strategy, StrategyKind};
use crate::simspace::{SimilarityModel, StorageMode};

pub const MANIFEST_FILE: &str = "manifest.json";

fn default_k_grid() -> Vec<usize> {
    (1..=10).map(|i| i * 10).collect()
}

fn default_format() -> CorpusFormat {
    CorpusFormat::ConllBio
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub name: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl StrategySpec {
    pub fn strategy(&self) -> Result<Strategy> {
        Strategy::from_parts(self.name, self.alpha, self.seed)
    }
}

/// Run configuration. Relative paths are resolved against the directory of
/// the config file when loaded through [`RunConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    #[serde(default = "default_format")]
    pub corpus_format: CorpusFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    pub strategies: Vec<StrategySpec>,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<usize>,
    pub output_dir: PathBuf,
    /// Export embeddings with top-N membership flags per strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_top: Option<usize>,
    /// Recompute similarity rows on demand instead of storing the matrix.
    #[serde(default)]
    pub lean: bool,
}

impl RunConfig {
    /// Parses JSON, or TOML when `toml` is set.
    pub fn parse(text: &str, toml: bool) -> Result<Self> {
        if toml {
            ::toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
        } else {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
        }
    }

    /// Loads a `.toml` or JSON config and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e == "toml");
        let mut cfg = RunConfig::parse(&text, is_toml)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.corpus);
        if let Some(e) = self.embeddings.as_mut() {
            join(e);
        }
        join(&mut self.output_dir);
    }

    /// Resolved strategies, checked for parameters and duplicate labels.
    pub fn resolved_strategies(&self) -> Result<Vec<Strategy>> {
        if self.strategies.is_empty() {
            return Err(Error::Config("no strategies configured".into()));
        }
        let strategies = self
            .strategies
            .iter()
            .map(|s| s.strategy().map_err(|e| Error::Config(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let mut labels: Vec<String> = strategies.iter().map(Strategy::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("strategy '{}' listed twice", w[0])));
        }
        Ok(strategies)
    }

    /// Checks the k grid against a ground set of `n` sentences.
    pub fn validate_k_grid(&self, n: usize) -> Result<()> {
        if self.k_grid.is_empty() {
            return Err(Error::Config("k_grid is empty".into()));
        }
        if self.k_grid[0] == 0 {
            return Err(Error::Config("k_grid entries must be >= 1".into()));
        }
        if self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "k_grid must be strictly increasing, got {:?}",
                self.k_grid
            )));
        }
        let max = *self.k_grid.last().expect("non-empty");
        if max > n {
            return Err(Error::Config(format!(
                "k_grid contains {max} but the corpus has only {n} sentences"
            )));
        }
        if let Some(top) = self.projection_top {
            if top == 0 || top > n {
                return Err(Error::Config(format!(
                    "projection_top must be in 1..={n}, got {top}"
                )));
            }
        }
        Ok(())
    }

    fn needs_embeddings(&self) -> bool {
        self.projection_top.is_some() || self.strategies.iter().any(|s| s.name.needs_embeddings())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub k: usize,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRecord {
    pub label: String,
    pub strategy: StrategyKind,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub ranking: String,
    pub subsets: Vec<SubsetRecord>,
}

/// Run summary written as `manifest.json`. Struct fields serialize in
/// declaration order and maps are sorted, so equal runs give equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub prng: String,
    pub corpus: InputRecord,
    pub corpus_format: CorpusFormat,
    pub embeddings: Option<InputRecord>,
    pub n: usize,
    pub dim: Option<usize>,
    pub beta: Option<f64>,
    pub k_grid: Vec<usize>,
    pub strategies: Vec<StrategyRecord>,
    pub projection: Option<String>,
    /// Relative path -> SHA-256 of every emitted file except the manifest.
    pub files: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Subset of the corpus in rank order, as conll-bio (tagged corpora) or
/// plain lines (untagged corpora).
pub fn materialize_subset(corpus: &Corpus, indices: &[usize]) -> Result<String> {
    let sentences = indices.iter().map(|&i| {
        corpus
            .get(i)
            .ok_or_else(|| Error::InvalidArgument(format!("sentence index {i} out of range")))
    });
    let sentences = sentences.collect::<Result<Vec<_>>>()?;
    if corpus.is_tagged() {
        write_conll(sentences)
    } else {
        Ok(write_plain(sentences))
    }
}

/// TSV of the embeddings with one 0/1 column per ranking marking its
/// top-`top` sentences, for external projection and plotting tools.
pub fn export_projection_input(
    emb: &EmbeddingMatrix,
    rankings: &[Ranking],
    top: usize,
) -> Result<String> {
    let n = emb.rows();
    if top == 0 || top > n {
        return Err(Error::InvalidArgument(format!(
            "top must be in 1..={n}, got {top}"
        )));
    }
    let mut flags = Vec::with_capacity(rankings.len());
    for r in rankings {
        if r.len() != n {
            return Err(Error::SizeMismatch {
                sentences: r.len(),
                embeddings: n,
            });
        }
        let mut member = vec![false; n];
        for &i in r.prefix(top)? {
            member[i] = true;
        }
        flags.push(member);
    }

    let mut out = String::from("index");
    for j in 0..emb.dim() {
        out.push_str(&format!("\te{j}"));
    }
    for r in rankings {
        out.push_str(&format!("\t{}_top{top}", r.strategy().label()));
    }
    out.push('\n');
    for i in 0..n {
        out.push_str(&i.to_string());
        for v in emb.row(i) {
            out.push_str(&format!("\t{v}"));
        }
        for f in &flags {
            out.push_str(if f[i] { "\t1" } else { "\t0" });
        }
        out.push('\n');
    }
    Ok(out)
}

struct Writer<'a> {
    root: &'a Path,
    files: BTreeMap<String, String>,
}

impl Writer<'_> {
    fn write(&mut self, rel: &str, contents: &str) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files
            .insert(rel.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }
}

/// Executes a run and writes all artifacts. Errors are tagged with the
/// stage that failed.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    let strategies = config
        .resolved_strategies()
        .map_err(|e| e.in_stage("validate config"))?;

    let corpus =
        load_corpus(&config.corpus, config.corpus_format).map_err(|e| e.in_stage("load corpus"))?;
    config
        .validate_k_grid(corpus.len())
        .map_err(|e| e.in_stage("validate config"))?;

    let emb = if config.needs_embeddings() {
        let path = config.embeddings.as_ref().ok_or_else(|| {
            Error::Config("configured strategies need an embeddings file".into())
                .in_stage("validate config")
        })?;
        let emb = load_embeddings(path).map_err(|e| e.in_stage("load embeddings"))?;
        validate_pair(&corpus, &emb).map_err(|e| e.in_stage("load embeddings"))?;
        Some(emb)
    } else {
        None
    };
    let mode = if config.lean {
        StorageMode::Lean
    } else {
        StorageMode::Dense
    };
    let model = emb
        .as_ref()
        .map(|e| SimilarityModel::build_with(e, mode))
        .transpose()
        .map_err(|e| e.in_stage("build similarity"))?;

    let rankings = strategies
        .par_iter()
        .map(|s| {
            s.rank(&corpus, model.as_ref())
                .map_err(|e| e.in_stage(format!("rank {}", s.label())))
        })
        .collect::<Result<Vec<_>>>()?;

    let beta = model.as_ref().and_then(SimilarityModel::beta);
    let ext = if corpus.is_tagged() { "conll" } else { "txt" };
    let mut writer = Writer {
        root: &config.output_dir,
        files: BTreeMap::new(),
    };
    let mut records = Vec::with_capacity(rankings.len());
    for ranking in &rankings {
        let strategy = ranking.strategy();
        let label = strategy.label();
        let stage = |e: Error| e.in_stage(format!("export {label}"));
        let ranking_rel = format!("rankings/{label}.tsv");
        writer
            .write(&ranking_rel, &write_ranking(ranking, beta))
            .map_err(stage)?;
        let mut subsets = Vec::with_capacity(config.k_grid.len());
        for &k in &config.k_grid {
            let rel = format!("subsets/{label}/k{k}.{ext}");
            let body =
                materialize_subset(&corpus, ranking.prefix(k).map_err(stage)?).map_err(stage)?;
            writer.write(&rel, &body).map_err(stage)?;
            subsets.push(SubsetRecord { k, file: rel });
        }
        records.push(StrategyRecord {
            label: label.clone(),
            strategy: strategy.kind(),
            alpha: strategy.alpha(),
            seed: strategy.seed(),
            ranking: ranking_rel,
            subsets,
        });
    }

    let projection = match (config.projection_top, emb.as_ref()) {
        (Some(top), Some(emb)) => {
            let rel = "projection.tsv".to_string();
            let body = export_projection_input(emb, &rankings, top)
                .map_err(|e| e.in_stage("export projection"))?;
            writer
                .write(&rel, &body)
                .map_err(|e| e.in_stage("export projection"))?;
            Some(rel)
        }
        _ => None,
    };

    let input = |p: &Path| -> Result<InputRecord> {
        Ok(InputRecord {
            path: p.to_string_lossy().into_owned(),
            sha256: sha256_file(p)?,
        })
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        prng: PRNG_NAME.to_string(),
        corpus: input(&config.corpus).map_err(|e| e.in_stage("write manifest"))?,
        corpus_format: config.corpus_format,
        embeddings: match (&config.embeddings, &emb) {
            (Some(p), Some(_)) => Some(input(p).map_err(|e| e.in_stage("write manifest"))?),
            _ => None,
        },
        n: corpus.len(),
        dim: emb.as_ref().map(EmbeddingMatrix::dim),
        beta,
        k_grid: config.k_grid.clone(),
        strategies: records,
        projection,
        files: writer.files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = config.output_dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(|e| Error::io(&path, e).in_stage("write manifest"))?;
    Ok(manifest)
}

/// Re-hashes every file listed in `<dir>/manifest.json`.
pub fn verify_manifest(dir: impl AsRef<Path>) -> Result<Manifest> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut bad = Vec::new();
    for (rel, sum) in &manifest.files {
        match sha256_file(&dir.join(rel)) {
            Ok(actual) if &actual == sum => {}
            Ok(_) => bad.push(format!("{rel}: checksum mismatch")),
            Err(e) => bad.push(format!("{rel}: {e}")),
        }
    }
    if bad.is_empty() {
        Ok(manifest)
    } else {
        Err(Error::Verification(bad))
    }
}
