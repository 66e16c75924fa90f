use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use stance_core::corpus::{write_corpus, Corpus};
use stance_core::embeddings::write_embeddings;
use stance_core::synthetic::generate;

use super::{create, CorpusArgs};
use crate::config::Config;

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Directory for `corpus.jsonl`, `embeddings.txt` and `truth.tsv`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn synth(args: &SynthArgs, cfg: &Config, seed: u64) -> anyhow::Result<()> {
    let s = generate(&cfg.synthetic, seed)?;
    let corpus = Corpus::new(s.tweets, s.labels)?;
    let mut out = create(&args.out_dir.join("corpus.jsonl"))?;
    write_corpus(&corpus, &mut out)?;
    out.flush()?;
    let mut out = create(&args.out_dir.join("embeddings.txt"))?;
    write_embeddings(&s.embeddings, &mut out)?;
    out.flush()?;
    let mut out = create(&args.out_dir.join("truth.tsv"))?;
    for (id, c) in &s.true_classes {
        writeln!(out, "{id}\t{c}")?;
    }
    out.flush()?;
    println!(
        "wrote {} tweets ({} labeled) to {}",
        corpus.len(),
        corpus.labels().len(),
        args.out_dir.display()
    );
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    /// One JSON object per tweet with its tokens and group.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Row<'a> {
    id: &'a str,
    tokens: &'a [String],
    hashtags: Vec<&'a str>,
    is_retweet: bool,
    canonical_key: &'a str,
    original_id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<stance_core::Stance>,
}

pub fn preprocess(args: &PreprocessArgs) -> anyhow::Result<()> {
    let corpus = args.input.load()?;
    let mut out = create(&args.out)?;
    for (t, p) in corpus.iter() {
        let group = corpus.group_of(&t.id).expect("every tweet is grouped");
        let row = Row {
            id: &t.id,
            tokens: &p.tokens,
            hashtags: p.hashtags.iter().map(String::as_str).collect(),
            is_retweet: p.is_retweet,
            canonical_key: &p.canonical_key,
            original_id: &group.original_id,
            label: corpus.label(&t.id).map(|l| l.class),
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    let retweets = corpus.iter().filter(|(_, p)| p.is_retweet).count();
    println!(
        "tweets {}  retweets {}  groups {}  labeled originals {}",
        corpus.len(),
        retweets,
        corpus.groups().len(),
        corpus.labeled_originals().len()
    );
    Ok(())
}
