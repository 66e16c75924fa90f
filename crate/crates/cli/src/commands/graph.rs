use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Subcommand;
use stance_core::corpus::write_labels;
use stance_core::evaluation::{Calibration, CalibrationOutcome};
use stance_core::network::{
    apply_decisions, build_graph, build_queue, candidate_edges, edge_table, k_core, label_edges, AnnotationDecision,
    CandidateEdge, RetweetGraph,
};
use stance_core::StanceLabel;
use stance_triage::{load_queue, write_queue, DecisionLog};

use super::model::load_predictions;
use super::{create, read_json, write_file, CorpusArgs};
use crate::config::Config;

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Build the labeled retweet graph of a corpus.
    Build {
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep the k-core of a graph.
    Kcore {
        #[arg(long)]
        graph: PathBuf,
        /// Minimum number of distinct neighbors; defaults to the config's k.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute edge labels from corpus annotations.
    Label {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// List unlabeled edges with confident predictions and build the triage queue.
    Candidates {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        input: CorpusArgs,
        /// Output of `predict`.
        #[arg(long)]
        predictions: PathBuf,
        /// Output of `calibrate`.
        #[arg(long)]
        calibration: PathBuf,
        /// Candidate edges, one JSON object per line.
        #[arg(long)]
        out: PathBuf,
        /// Triage queue for `triage serve`.
        #[arg(long)]
        queue: Option<PathBuf>,
        /// Edge summary table.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Fold a triage decision log into the graph.
    Apply {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        input: CorpusArgs,
        #[arg(long)]
        queue: PathBuf,
        #[arg(long)]
        log: PathBuf,
        /// Candidates file, for the candidate row of the summary table.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Confirmed tweet labels, `tweet_id<TAB>label`.
        #[arg(long)]
        labels_out: Option<PathBuf>,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
}

fn read_graph(path: &Path) -> anyhow::Result<RetweetGraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(RetweetGraph::from_tsv(&text)?)
}

fn summary(g: &RetweetGraph) -> String {
    let counts: Vec<String> = g.status_counts().iter().map(|(s, n)| format!("{s} {n}")).collect();
    format!(
        "nodes {}  edges {}  ({})",
        g.node_count(),
        g.edge_count(),
        counts.join(", ")
    )
}

fn corpus_labels(input: &CorpusArgs) -> anyhow::Result<(stance_core::corpus::Corpus, BTreeMap<String, StanceLabel>)> {
    let corpus = input.load()?.propagate_labels();
    let labels = corpus.labels().clone();
    Ok((corpus, labels))
}

fn read_candidates(path: &Path) -> anyhow::Result<Vec<CandidateEdge>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).with_context(|| format!("parsing {}", path.display())))
        .collect()
}

pub fn run(cmd: &GraphCommand, cfg: &Config) -> anyhow::Result<()> {
    match cmd {
        GraphCommand::Build { input, out } => {
            let (corpus, labels) = corpus_labels(input)?;
            let g = label_edges(&build_graph(&corpus), &labels);
            write_file(out, g.to_tsv())?;
            println!("{}", summary(&g));
        }
        GraphCommand::Kcore { graph, k, out } => {
            let k = k.unwrap_or(cfg.k());
            anyhow::ensure!(k >= 1, "k must be at least 1");
            let core = k_core(&read_graph(graph)?, k);
            write_file(out, core.to_tsv())?;
            println!("{k}-core: {}", summary(&core));
        }
        GraphCommand::Label { graph, input, out } => {
            let (_, labels) = corpus_labels(input)?;
            let g = label_edges(&read_graph(graph)?, &labels);
            write_file(out, g.to_tsv())?;
            println!("{}", summary(&g));
        }
        GraphCommand::Candidates {
            graph,
            input,
            predictions,
            calibration,
            out,
            queue,
            stats,
        } => {
            let (corpus, labels) = corpus_labels(input)?;
            let g = label_edges(&read_graph(graph)?, &labels);
            let preds = load_predictions(predictions)?;
            let outcomes: Vec<CalibrationOutcome> = read_json(calibration)?;
            let cals: Vec<Calibration> = outcomes.iter().filter_map(|o| o.calibration().copied()).collect();
            for o in outcomes.iter().filter(|o| o.calibration().is_none()) {
                tracing::warn!(class = %o.class(), "no calibrated threshold; class yields no candidates");
            }
            let cands = candidate_edges(&g, &preds, &cals);
            let mut w = create(out)?;
            for c in &cands {
                serde_json::to_writer(&mut w, c)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
            let items = build_queue(&cands, &corpus);
            if let Some(q) = queue {
                let mut w = create(q)?;
                write_queue(&items, &mut w)?;
                w.flush()?;
            }
            let table = edge_table(&g, &cands, None);
            if let Some(s) = stats {
                write_file(s, &table)?;
            }
            print!("{table}");
            println!("queue items {}", items.len());
        }
        GraphCommand::Apply {
            graph,
            input,
            queue,
            log,
            candidates,
            out,
            labels_out,
            stats,
        } => {
            let (_, labels) = corpus_labels(input)?;
            let g = label_edges(&read_graph(graph)?, &labels);
            let items = load_queue(queue)?;
            let (_, decisions, _): (_, Vec<AnnotationDecision>, _) = DecisionLog::open(log)?;
            let outcome = apply_decisions(&g, &labels, &items, &decisions);
            for r in &outcome.rejected {
                tracing::warn!(item = %r.decision.item_id, reason = %r.reason, "decision rejected");
            }
            write_file(out, outcome.graph.to_tsv())?;
            if let Some(p) = labels_out {
                let mut w = create(p)?;
                let confirmed = outcome
                    .labels
                    .iter()
                    .filter(|(_, l)| l.provenance == stance_core::Provenance::TriageConfirmed);
                write_labels(confirmed, &mut w)?;
                w.flush()?;
            }
            let cands = match candidates {
                Some(p) => read_candidates(p)?,
                None => Vec::new(),
            };
            let table = edge_table(&g, &cands, Some(&outcome.stats));
            if let Some(s) = stats {
                write_file(s, &table)?;
            }
            print!("{table}");
        }
    }
    Ok(())
}
