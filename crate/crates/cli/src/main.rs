use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rpsel_core::corpus::{load_corpus, load_embeddings, validate_pair, Corpus, CorpusFormat};
use rpsel_core::pipeline::{self, RunConfig};
use rpsel_core::selector::{
    parse_exclude, select_batch_alc, select_batch_alr, write_ranking, Strategy, StrategyKind,
    UncertaintySet,
};
use rpsel_core::simspace::{SimilarityModel, StorageMode};

#[derive(Parser, Debug)]
#[command(
    author,
    version,
    about = "Embedding-based data selection for sequence labeling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank the whole corpus with one strategy.
    Rank {
        #[arg(long)]
        strategy: StrategyKind,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "conll-bio")]
        format: CorpusFormat,
        /// Required by ratio-penalty, coverage and linear-penalty.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: PathBuf,
        /// Recompute similarity rows instead of storing the n x n matrix.
        #[arg(long)]
        lean: bool,
    },
    /// Pick the next active-learning batch from tagger uncertainties.
    SelectBatch {
        #[arg(long)]
        strategy: BatchStrategy,
        #[arg(long)]
        uncertainty: PathBuf,
        /// Already-labeled sentence indices, one per line.
        #[arg(long)]
        exclude: Option<PathBuf>,
        #[arg(long)]
        batch: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Check token counts against this corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "conll-bio")]
        format: CorpusFormat,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print embedding-cloud statistics and optionally a neighbor table.
    Stats {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value = "conll-bio")]
        format: CorpusFormat,
        /// Sentence index whose nearest neighbors are listed.
        #[arg(long)]
        neighbors: Option<usize>,
        #[arg(long, short, default_value_t = 3)]
        m: usize,
        #[arg(long)]
        lean: bool,
    },
    /// Run every configured strategy and export rankings and subsets.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check the checksums recorded in a run's manifest.
    Verify {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BatchStrategy {
    Alc,
    Alr,
}

fn storage(lean: bool) -> StorageMode {
    if lean {
        StorageMode::Lean
    } else {
        StorageMode::Dense
    }
}

#[allow(clippy::too_many_arguments)]
fn rank(
    kind: StrategyKind,
    corpus: PathBuf,
    format: CorpusFormat,
    embeddings: Option<PathBuf>,
    alpha: Option<f64>,
    seed: Option<u64>,
    output: PathBuf,
    lean: bool,
) -> Result<()> {
    let strategy = Strategy::from_parts(kind, alpha, seed)?;
    let corpus = load_corpus(&corpus, format).context("loading corpus")?;
    let model = match embeddings {
        Some(path) => {
            let emb = load_embeddings(&path).context("loading embeddings")?;
            validate_pair(&corpus, &emb)?;
            Some(SimilarityModel::build_with(&emb, storage(lean)).context("building similarity")?)
        }
        None if kind.needs_embeddings() => bail!("strategy {kind} needs --embeddings"),
        None => None,
    };
    let ranking = strategy.rank(&corpus, model.as_ref())?;
    let beta = model.as_ref().and_then(SimilarityModel::beta);
    fs::write(&output, write_ranking(&ranking, beta))
        .with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn select_batch(
    strategy: BatchStrategy,
    uncertainty: PathBuf,
    exclude: Option<PathBuf>,
    batch: usize,
    seed: Option<u64>,
    corpus: Option<PathBuf>,
    format: CorpusFormat,
    output: PathBuf,
) -> Result<()> {
    let set = UncertaintySet::load(&uncertainty).context("loading uncertainties")?;
    if let Some(path) = corpus {
        let corpus = load_corpus(&path, format).context("loading corpus")?;
        set.validate_against(&corpus)?;
    }
    let exclude = match exclude {
        Some(path) => {
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            parse_exclude(&text)?
        }
        None => Default::default(),
    };
    let picked = match (strategy, seed) {
        (BatchStrategy::Alc, None) => select_batch_alc(&set, &exclude, batch)?,
        (BatchStrategy::Alc, Some(_)) => bail!("alc is deterministic and takes no --seed"),
        (BatchStrategy::Alr, Some(seed)) => select_batch_alr(&set, &exclude, batch, seed)?,
        (BatchStrategy::Alr, None) => bail!("alr requires --seed"),
    };
    let body: String = picked.iter().map(|i| format!("{i}\n")).collect();
    fs::write(&output, body).with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

fn stats(
    embeddings: PathBuf,
    corpus: Option<PathBuf>,
    format: CorpusFormat,
    neighbors: Option<usize>,
    m: usize,
    lean: bool,
) -> Result<()> {
    let emb = load_embeddings(&embeddings).context("loading embeddings")?;
    let corpus: Option<Corpus> = match corpus {
        Some(path) => {
            let c = load_corpus(&path, format).context("loading corpus")?;
            validate_pair(&c, &emb)?;
            Some(c)
        }
        None => None,
    };
    let model = SimilarityModel::build_with(&emb, storage(lean)).context("building similarity")?;
    println!("n\t{}", emb.rows());
    println!("d\t{}", emb.dim());
    match model.beta() {
        Some(b) => println!("beta\t{b}"),
        None => println!("beta\tnone"),
    }
    if let Some(s) = model.off_diagonal_stats() {
        println!("sim_mean\t{}", s.mean);
        println!("sim_min\t{}", s.min);
        println!("sim_max\t{}", s.max);
    }
    if let Some(s) = neighbors {
        let text = |i: usize| {
            corpus
                .as_ref()
                .and_then(|c| c.get(i))
                .map(|s| s.text())
                .unwrap_or_default()
        };
        println!();
        println!("rank\tindex\tsimilarity\ttext");
        println!("0\t{s}\t1\t{}", text(s));
        for (r, (j, v)) in model.nearest_neighbors(s, m)?.into_iter().enumerate() {
            println!("{}\t{j}\t{v}\t{}", r + 1, text(j));
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Rank {
            strategy,
            corpus,
            format,
            embeddings,
            alpha,
            seed,
            output,
            lean,
        } => rank(
            strategy, corpus, format, embeddings, alpha, seed, output, lean,
        ),
        Command::SelectBatch {
            strategy,
            uncertainty,
            exclude,
            batch,
            seed,
            corpus,
            format,
            output,
        } => select_batch(
            strategy,
            uncertainty,
            exclude,
            batch,
            seed,
            corpus,
            format,
            output,
        ),
        Command::Stats {
            embeddings,
            corpus,
            format,
            neighbors,
            m,
            lean,
        } => stats(embeddings, corpus, format, neighbors, m, lean),
        Command::Run { config, output_dir } => {
            let mut cfg = RunConfig::load(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let manifest = pipeline::run(&cfg)?;
            println!(
                "wrote {} files to {}",
                manifest.files.len() + 1,
                cfg.output_dir.display()
            );
            Ok(())
        }
        Command::Verify { dir } => {
            let manifest = pipeline::verify_manifest(&dir)?;
            println!("{} files verified", manifest.files.len());
            Ok(())
        }
    }
}
