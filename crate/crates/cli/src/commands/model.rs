use std::collections::HashMap;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use stance_core::classifiers::{read_model, write_model, Doc, Featurizer, Model, ModelKind};
use stance_core::embeddings::{load_embeddings, EmbeddingTable};
use stance_core::evaluation::{calibrate_threshold, cross_validate, CalibrationOutcome, CvReport, ModelLearner};
use stance_core::{rng, ProbDist, Stance};

use super::{create, read_json, write_file, AuxArgs, CorpusArgs};
use crate::config::Config;

#[derive(Debug, clap::Args)]
pub struct EmbeddingArgs {
    /// Word vectors in word2vec text format. Needed by logreg and cnn.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

impl EmbeddingArgs {
    fn load(&self, kind: Option<ModelKind>) -> anyhow::Result<EmbeddingTable> {
        match &self.embeddings {
            Some(p) => {
                let (table, stats) = load_embeddings(p)?;
                if stats.skipped > 0 {
                    tracing::warn!(skipped = stats.skipped, "skipped bad embedding lines");
                }
                Ok(table)
            }
            None if kind.is_some_and(|k| matches!(k, ModelKind::Random | ModelKind::HsPmi)) => {
                Ok(EmbeddingTable::new(1, HashMap::new())?)
            }
            None => anyhow::bail!("--embeddings is required for this model"),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[command(flatten)]
    pub aux: AuxArgs,
    #[command(flatten)]
    pub emb: EmbeddingArgs,
    /// random, hs_pmi, logreg or cnn.
    #[arg(long)]
    pub model: ModelKind,
    /// Where to write the model dump.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn train(args: &TrainArgs, cfg: &Config, seed: u64) -> anyhow::Result<()> {
    let corpus = args.aux.merge(args.input.load()?)?;
    let table = args.emb.load(Some(args.model))?;
    let fx = Featurizer {
        table: &table,
        max_len: cfg.max_len(),
    };
    let mut data: Vec<(Doc, Stance)> = Vec::new();
    for (id, c) in corpus
        .labeled_originals()
        .into_iter()
        .chain(corpus.train_only_examples())
    {
        data.push((Doc::from_corpus(&corpus, id).expect("corpus tweet"), c));
    }
    let model = Model::train(args.model, &data, &fx, &cfg.train(args.model, seed))?;
    let mut out = create(&args.out)?;
    write_model(&model, &mut out)?;
    out.flush()?;
    println!(
        "trained {} on {} tweets -> {}",
        args.model,
        data.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[command(flatten)]
    pub emb: EmbeddingArgs,
    /// Model dump written by `train`.
    #[arg(long)]
    pub model_file: PathBuf,
    /// `tweet_id<TAB>class<TAB>p_pro_russian<TAB>p_pro_ukrainian<TAB>p_neutral`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn predict(args: &PredictArgs, cfg: &Config, seed: u64) -> anyhow::Result<()> {
    let corpus = args.input.load()?;
    let f = std::fs::File::open(&args.model_file).with_context(|| format!("opening {}", args.model_file.display()))?;
    let model = read_model(BufReader::new(f))?;
    let table = args.emb.load(Some(model.kind()))?;
    let fx = Featurizer {
        table: &table,
        max_len: cfg.max_len(),
    };
    let mut rng = rng::stream(seed, 7);
    let mut ids: Vec<&str> = corpus.tweets().iter().map(|t| t.id.as_str()).collect();
    ids.sort_unstable();
    let mut out = create(&args.out)?;
    for id in ids {
        let p = model.predict(&Doc::from_corpus(&corpus, id).expect("corpus tweet"), &fx, &mut rng);
        match p.probs {
            Some(ProbDist([r, u, n])) => writeln!(out, "{id}\t{}\t{r:?}\t{u:?}\t{n:?}", p.class)?,
            None => writeln!(out, "{id}\t{}\t-\t-\t-", p.class)?,
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a predictions file, keeping rows that carry probabilities.
pub fn load_predictions(path: &Path) -> anyhow::Result<HashMap<String, ProbDist>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split('\t').collect();
        anyhow::ensure!(cols.len() == 5, "{}:{}: expected 5 columns", path.display(), i + 1);
        if cols[2] == "-" {
            continue;
        }
        let p: Vec<f64> = cols[2..]
            .iter()
            .map(|v| v.parse::<f64>())
            .collect::<Result<_, _>>()
            .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        out.insert(cols[0].to_string(), ProbDist([p[0], p[1], p[2]]));
    }
    Ok(out)
}

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[command(flatten)]
    pub aux: AuxArgs,
    #[command(flatten)]
    pub emb: EmbeddingArgs,
    #[arg(long)]
    pub model: ModelKind,
    /// Receives `report.txt`, `report.json` and `pr_<class>.tsv` curves.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn evaluate(args: &EvaluateArgs, cfg: &Config, seed: u64) -> anyhow::Result<()> {
    let corpus = args.aux.merge(args.input.load()?)?;
    let table = args.emb.load(Some(args.model))?;
    let learner = ModelLearner {
        kind: args.model,
        cfg: cfg.train(args.model, seed),
        fx: Featurizer {
            table: &table,
            max_len: cfg.max_len(),
        },
    };
    let report = cross_validate(&corpus, &learner, seed, cfg.target_precision())?;
    let text = report.render_text();
    write_file(&args.out_dir.join("report.txt"), &text)?;
    write_file(
        &args.out_dir.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    if let Some(curves) = &report.pooled_curves {
        for c in Stance::ALL {
            write_file(&args.out_dir.join(format!("pr_{c}.tsv")), curves[c.index()].to_tsv())?;
        }
    }
    print!("{text}");
    Ok(())
}

#[derive(Debug, clap::Args)]
pub struct CalibrateArgs {
    /// `report.json` from `evaluate`.
    #[arg(long)]
    pub report: PathBuf,
    /// Precision to reach; defaults to the config's target_precision.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn calibrate(args: &CalibrateArgs, cfg: &Config) -> anyhow::Result<()> {
    let report: CvReport = read_json(&args.report)?;
    let target = args.target.unwrap_or(cfg.target_precision());
    anyhow::ensure!(target > 0.0 && target <= 1.0, "target must be in (0, 1]");
    let mut outcomes = Vec::new();
    for class in Stance::POLARIZED {
        let scores: Option<Vec<(f64, bool)>> = report
            .predictions
            .iter()
            .map(|e| e.probs.map(|p| (p[class.index()], e.gold == class)))
            .collect();
        let scores = scores.with_context(|| format!("model {} has no probabilities to calibrate", report.model))?;
        outcomes.push(calibrate_threshold(class, &scores, target)?);
    }
    for o in &outcomes {
        match o {
            CalibrationOutcome::Calibrated(c) => println!(
                "{}: threshold {:.6} precision {:.4} recall {:.4}",
                c.class, c.threshold, c.achieved_precision, c.achieved_recall
            ),
            CalibrationOutcome::Unachievable {
                class, best_precision, ..
            } => {
                println!("{class}: precision {target} unachievable (best {best_precision:.4})")
            }
        }
    }
    write_file(&args.out, serde_json::to_string_pretty(&outcomes)? + "\n")?;
    Ok(())
}
