pub mod data;
pub mod graph;
pub mod model;
pub mod triage;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use stance_core::corpus::{ingest_corpus, load_labels, Corpus, CorpusFormat};
use stance_core::{Provenance, Stance, StanceLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Tsv,
}

/// Input corpus options shared by several subcommands.
#[derive(Debug, Clone, clap::Args)]
pub struct CorpusArgs {
    /// Corpus file (JSON lines, or TSV with a `.tsv` extension).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Override the format guessed from the extension.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Extra `tweet_id<TAB>label` annotations, overriding labels in the corpus.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

impl CorpusArgs {
    pub fn load(&self) -> anyhow::Result<Corpus> {
        load_corpus(&self.corpus, self.format, self.labels.as_deref())
    }
}

pub fn load_corpus(path: &Path, format: Option<Format>, labels: Option<&Path>) -> anyhow::Result<Corpus> {
    let format = match format {
        Some(Format::Tsv) => CorpusFormat::Tsv,
        Some(Format::Jsonl) => CorpusFormat::JsonLines,
        None if path.extension().is_some_and(|e| e == "tsv") => CorpusFormat::Tsv,
        None => CorpusFormat::JsonLines,
    };
    let ingested = ingest_corpus(path, format)?;
    for (line, reason) in &ingested.malformed {
        tracing::warn!(path = %path.display(), line, %reason, "skipped malformed record");
    }
    let corpus = ingested.corpus;
    match labels {
        None => Ok(corpus),
        Some(p) => {
            let extra = load_labels(p)?;
            Ok(corpus.with_labels(
                extra
                    .into_iter()
                    .map(|(id, c)| (id, StanceLabel::new(c, Provenance::Manual))),
            )?)
        }
    }
}

/// Optional auxiliary training data, labeled with a single class.
#[derive(Debug, Clone, clap::Args)]
pub struct AuxArgs {
    /// Corpus of extra training tweets. They are never used for testing.
    #[arg(long, requires = "aux_class")]
    pub aux: Option<PathBuf>,
    /// Class assigned to every auxiliary tweet.
    #[arg(long)]
    pub aux_class: Option<Stance>,
}

impl AuxArgs {
    pub fn merge(&self, corpus: Corpus) -> anyhow::Result<Corpus> {
        match (&self.aux, self.aux_class) {
            (Some(path), Some(class)) => {
                let aux = load_corpus(path, None, None)?;
                Ok(corpus.merge_auxiliary(&aux, class)?)
            }
            _ => Ok(corpus),
        }
    }
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    let mut out = create(path)?;
    out.write_all(contents.as_ref())?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
