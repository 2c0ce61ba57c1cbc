//! Sentence corpora and their precomputed embeddings.
//!
//! Two corpus formats are understood:
//!
//! * `conll-bio`: one `token<TAB>tag` pair per line, sentences separated by
//!   blank lines. The final sentence may omit the trailing blank line.
//! * `plain-lines`: one sentence per line, tokens split on ASCII whitespace.
//!
//! Embeddings use a small text format: a header line `n d`, then `n` rows of
//! `d` decimal reals. Row `i` belongs to sentence `i`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    ConllBio,
    PlainLines,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conll-bio" => Ok(CorpusFormat::ConllBio),
            "plain-lines" => Ok(CorpusFormat::PlainLines),
            other => Err(Error::InvalidArgument(format!(
                "unknown corpus format '{other}' (expected conll-bio or plain-lines)"
            ))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::ConllBio => "conll-bio",
            CorpusFormat::PlainLines => "plain-lines",
        })
    }
}

/// Returns true for `O`, `B-<name>` and `I-<name>` with a non-empty name.
pub fn is_bio_tag(tag: &str) -> bool {
    if tag == "O" {
        return true;
    }
    match tag.split_once('-') {
        Some(("B" | "I", name)) => !name.is_empty(),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    index: usize,
    tokens: Vec<String>,
    tags: Option<Vec<String>>,
}

impl Sentence {
    pub fn new(index: usize, tokens: Vec<String>, tags: Option<Vec<String>>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "sentence {index} has no tokens"
            )));
        }
        if let Some(tags) = &tags {
            if tags.len() != tokens.len() {
                return Err(Error::InvalidArgument(format!(
                    "sentence {index} has {} tokens but {} tags",
                    tokens.len(),
                    tags.len()
                )));
            }
            if let Some(bad) = tags.iter().find(|t| !is_bio_tag(t)) {
                return Err(Error::InvalidArgument(format!(
                    "sentence {index}: '{bad}' is not a BIO tag"
                )));
            }
        }
        Ok(Sentence {
            index,
            tokens,
            tags,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> Option<&[String]> {
        self.tags.as_deref()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// The ground set: every available sentence, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    name: String,
    sentences: Vec<Sentence>,
}

impl Corpus {
    /// Builds a corpus from sentences whose indices must be `0..n` in order.
    pub fn new(name: impl Into<String>, sentences: Vec<Sentence>) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if let Some((pos, s)) = sentences.iter().enumerate().find(|(i, s)| s.index != *i) {
            return Err(Error::InvalidArgument(format!(
                "sentence at position {pos} carries index {}",
                s.index
            )));
        }
        Ok(Corpus {
            name: name.into(),
            sentences,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn get(&self, index: usize) -> Option<&Sentence> {
        self.sentences.get(index)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn is_tagged(&self) -> bool {
        self.sentences.iter().all(|s| s.tags.is_some())
    }

    pub fn token_counts(&self) -> Vec<usize> {
        self.sentences.iter().map(Sentence::len).collect()
    }

    /// Parses corpus text in the given format.
    pub fn parse(name: impl Into<String>, text: &str, format: CorpusFormat) -> Result<Self> {
        let sentences = match format {
            CorpusFormat::ConllBio => parse_conll(text)?,
            CorpusFormat::PlainLines => parse_plain(text)?,
        };
        Corpus::new(name, sentences)
    }

    /// Serializes a tagged corpus as conll-bio.
    pub fn to_conll(&self) -> Result<String> {
        write_conll(self.sentences.iter())
    }
}

/// Writes the given tagged sentences as conll-bio text, in iteration order.
pub fn write_conll<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> Result<String> {
    let mut out = String::new();
    for (i, s) in sentences.into_iter().enumerate() {
        let tags = s.tags().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "sentence {} has no tags; conll-bio output needs tagged sentences",
                s.index
            ))
        })?;
        if i > 0 {
            out.push('\n');
        }
        for (tok, tag) in s.tokens.iter().zip(tags) {
            out.push_str(tok);
            out.push('\t');
            out.push_str(tag);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Writes sentences as plain lines, one space-joined sentence per line.
pub fn write_plain<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&s.text());
        out.push('\n');
    }
    out
}

fn parse_conll(text: &str) -> Result<Vec<Sentence>> {
    const WHAT: &str = "conll-bio";
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let mut start_line = 0;

    let mut flush = |tokens: &mut Vec<String>, tags: &mut Vec<String>, line: usize| -> Result<()> {
        if tokens.is_empty() {
            return Ok(());
        }
        let index = sentences.len();
        let s = Sentence::new(index, std::mem::take(tokens), Some(std::mem::take(tags)))
            .map_err(|e| Error::parse(WHAT, line, e.to_string()))?;
        sentences.push(s);
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            flush(&mut tokens, &mut tags, start_line)?;
            continue;
        }
        if tokens.is_empty() {
            start_line = lineno;
        }
        let Some((token, tag)) = line.split_once('\t') else {
            return Err(Error::parse(
                WHAT,
                lineno,
                format!("expected token<TAB>tag, got '{line}'"),
            ));
        };
        if token.is_empty() {
            return Err(Error::parse(WHAT, lineno, "empty token"));
        }
        if tag.is_empty() {
            return Err(Error::parse(
                WHAT,
                lineno,
                format!("token '{token}' has no tag"),
            ));
        }
        if !is_bio_tag(tag) {
            return Err(Error::parse(
                WHAT,
                lineno,
                format!("'{tag}' is not a BIO tag"),
            ));
        }
        tokens.push(token.to_string());
        tags.push(tag.to_string());
    }
    flush(&mut tokens, &mut tags, start_line)?;
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(sentences)
}

fn parse_plain(text: &str) -> Result<Vec<Sentence>> {
    if text.trim().is_empty() {
        return Err(Error::EmptyCorpus);
    }
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let tokens: Vec<String> = line.split_ascii_whitespace().map(str::to_string).collect();
            if tokens.is_empty() {
                return Err(Error::parse("plain-lines", i + 1, "empty sentence"));
            }
            Sentence::new(i, tokens, None)
        })
        .collect()
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Corpus::parse(name, &text, format)
}

/// Dense row-major `rows x dim` matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(rows: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be >= 1".into(),
            ));
        }
        if values.len() != rows * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} values for a {rows}x{dim} matrix, got {}",
                rows * dim,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(EmbeddingMatrix { rows, dim, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::InvalidArgument(format!(
                "row {i} has {} values, expected {dim}",
                rows[i].len()
            )));
        }
        EmbeddingMatrix::new(rows.len(), dim, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Returns `scale * e + shift` for every row `e`.
    pub fn affine(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "shift has {} entries, expected {}",
                shift.len(),
                self.dim
            )));
        }
        let values = self
            .values
            .chunks(self.dim)
            .flat_map(|row| row.iter().zip(shift).map(|(v, t)| scale * v + t))
            .collect();
        EmbeddingMatrix::new(self.rows, self.dim, values)
    }

    pub fn parse(text: &str) -> Result<Self> {
        const WHAT: &str = "embeddings";
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(WHAT, 1, "missing 'n d' header"))?;
        let header: Vec<&str> = header.split_ascii_whitespace().collect();
        let [n, d] = header.as_slice() else {
            return Err(Error::parse(WHAT, 1, "header must be two integers 'n d'"));
        };
        let rows: usize = n
            .parse()
            .map_err(|_| Error::parse(WHAT, 1, format!("bad row count '{n}'")))?;
        let dim: usize = d
            .parse()
            .map_err(|_| Error::parse(WHAT, 1, format!("bad dimension '{d}'")))?;
        if dim == 0 {
            return Err(Error::parse(WHAT, 1, "dimension must be >= 1"));
        }

        let mut values = Vec::with_capacity(rows * dim);
        let mut seen = 0;
        for (i, line) in lines {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if seen == rows {
                return Err(Error::parse(
                    WHAT,
                    lineno,
                    format!("header declares {rows} rows but more rows follow"),
                ));
            }
            let mut count = 0;
            for (col, tok) in line.split_ascii_whitespace().enumerate() {
                let v: f64 = tok.parse().map_err(|_| {
                    Error::parse(
                        WHAT,
                        lineno,
                        format!("row {seen}, column {col}: '{tok}' is not a number"),
                    )
                })?;
                if !v.is_finite() {
                    return Err(Error::parse(
                        WHAT,
                        lineno,
                        format!("row {seen}, column {col}: non-finite value '{tok}'"),
                    ));
                }
                values.push(v);
                count += 1;
            }
            if count != dim {
                return Err(Error::parse(
                    WHAT,
                    lineno,
                    format!("row {seen} has {count} values, expected {dim}"),
                ));
            }
            seen += 1;
        }
        if seen != rows {
            return Err(Error::parse(
                WHAT,
                text.lines().count().max(1),
                format!("header declares {rows} rows but only {seen} found"),
            ));
        }
        EmbeddingMatrix::new(rows, dim, values)
    }

    /// Serializes in the embedding text format. Values use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.dim);
        for row in self.values.chunks(self.dim) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EmbeddingMatrix::parse(&text)
}

pub fn validate_pair(corpus: &Corpus, emb: &EmbeddingMatrix) -> Result<()> {
    if corpus.len() != emb.rows() {
        return Err(Error::SizeMismatch {
            sentences: corpus.len(),
            embeddings: emb.rows(),
        });
    }
    Ok(())
}
