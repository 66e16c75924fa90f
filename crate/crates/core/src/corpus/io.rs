use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, Tweet};
use crate::{Error, Provenance, Result, Stance, StanceLabel};

/// One line of a corpus file. Field order is the canonical serialization order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TweetRecord {
    pub id: String,
    pub user_id: String,
    pub timestamp: i64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Stance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON object per line.
    JsonLines,
    /// `id<TAB>user_id<TAB>timestamp<TAB>text[<TAB>label[<TAB>lang]]`; an empty
    /// label column means unlabeled.
    Tsv,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: Corpus,
    /// 1-based line numbers of skipped records, with the reason.
    pub malformed: Vec<(usize, String)>,
}

pub fn ingest_corpus(path: &Path, format: CorpusFormat) -> Result<Ingested> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, format)
}

pub fn parse_corpus(text: &str, format: CorpusFormat) -> Result<Ingested> {
    let mut tweets = Vec::new();
    let mut labels = BTreeMap::new();
    let mut malformed = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = match format {
            CorpusFormat::JsonLines => serde_json::from_str::<TweetRecord>(line).map_err(|e| e.to_string()),
            CorpusFormat::Tsv => parse_tsv_record(line),
        };
        let record = match record {
            Ok(r) if r.text.trim().is_empty() => {
                malformed.push((i + 1, "empty text".to_string()));
                continue;
            }
            Ok(r) => r,
            Err(reason) => {
                malformed.push((i + 1, reason));
                continue;
            }
        };
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId(record.id));
        }
        if let Some(class) = record.label {
            labels.insert(record.id.clone(), StanceLabel::manual(class));
        }
        tweets.push(Tweet {
            id: record.id,
            user_id: record.user_id,
            timestamp: record.timestamp,
            raw_text: record.text,
            language: record.lang,
        });
    }
    Ok(Ingested {
        corpus: Corpus::new(tweets, labels)?,
        malformed,
    })
}

fn parse_tsv_record(line: &str) -> std::result::Result<TweetRecord, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if !(4..=6).contains(&cols.len()) {
        return Err(format!("expected 4 to 6 columns, got {}", cols.len()));
    }
    let timestamp = cols[2].parse().map_err(|_| format!("bad timestamp `{}`", cols[2]))?;
    let label = match cols.get(4) {
        None | Some(&"") => None,
        Some(s) => Some(s.parse::<Stance>().map_err(|e| e.to_string())?),
    };
    Ok(TweetRecord {
        id: cols[0].to_string(),
        user_id: cols[1].to_string(),
        timestamp,
        text: cols[3].to_string(),
        label,
        lang: cols.get(5).filter(|s| !s.is_empty()).map(|s| s.to_string()),
    })
}

/// Writes the corpus as JSON lines. Only manual labels are written; derived
/// labels are recomputed after reading.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for t in corpus.tweets() {
        let label = corpus
            .label(&t.id)
            .filter(|l| l.provenance == Provenance::Manual)
            .map(|l| l.class);
        let record = TweetRecord {
            id: t.id.clone(),
            user_id: t.user_id.clone(),
            timestamp: t.timestamp,
            text: t.raw_text.clone(),
            label,
            lang: t.language.clone(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a `tweet_id<TAB>label` file.
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, Stance>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, label) = line.split_once('\t').ok_or_else(|| Error::Parse {
            what: "labels file",
            line: i + 1,
            reason: "expected `tweet_id<TAB>label`".into(),
        })?;
        let class = label.trim().parse::<Stance>().map_err(|e| Error::Parse {
            what: "labels file",
            line: i + 1,
            reason: e.to_string(),
        })?;
        if labels.insert(id.to_string(), class).is_some() {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(labels)
}

pub fn write_labels<'a, W: Write>(
    labels: impl IntoIterator<Item = (&'a String, &'a StanceLabel)>,
    mut out: W,
) -> std::io::Result<()> {
    for (id, l) in labels {
        writeln!(out, "{id}\t{}", l.class)?;
    }
    Ok(())
}
