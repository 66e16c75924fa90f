use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{relabel, CandidateEdge, EdgeKey, EdgeStatus, RetweetGraph};
use crate::corpus::Corpus;
use crate::{Provenance, Stance, StanceLabel};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemState {
    #[default]
    Pending,
    Decided,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriageItem {
    pub item_id: String,
    pub tweet_id: String,
    pub raw_text: String,
    pub predicted_class: Stance,
    pub confidence: f64,
    pub edge: EdgeKey,
    #[serde(default)]
    pub state: ItemState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ProRussian,
    ProUkrainian,
    Neutral,
    Skip,
}

impl Verdict {
    pub fn class(self) -> Option<Stance> {
        match self {
            Verdict::ProRussian => Some(Stance::ProRussian),
            Verdict::ProUkrainian => Some(Stance::ProUkrainian),
            Verdict::Neutral => Some(Stance::Neutral),
            Verdict::Skip => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationDecision {
    pub item_id: String,
    pub verdict: Verdict,
    pub annotator_id: String,
    /// Milliseconds since the Unix epoch.
    pub decided_at: i64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub pending: usize,
    pub reviewed: usize,
    pub decided: usize,
    pub skipped: usize,
    /// Decided items whose verdict matched the predicted class.
    pub confirmed: usize,
    /// Previously unlabeled edges now carrying this class.
    pub new_edges: usize,
    /// `new_edges / reviewed`; `None` before the first review.
    pub hit_rate: Option<f64>,
}

impl ClassStats {
    pub fn update_hit_rate(&mut self) {
        self.hit_rate = (self.reviewed > 0).then(|| self.new_edges as f64 / self.reviewed as f64);
    }
}

/// Review counts are keyed by the item's predicted class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TriageStats {
    pub pro_russian: ClassStats,
    pub pro_ukrainian: ClassStats,
}

impl TriageStats {
    pub fn get(&self, class: Stance) -> Option<&ClassStats> {
        match class {
            Stance::ProRussian => Some(&self.pro_russian),
            Stance::ProUkrainian => Some(&self.pro_ukrainian),
            Stance::Neutral => None,
        }
    }

    pub fn get_mut(&mut self, class: Stance) -> Option<&mut ClassStats> {
        match class {
            Stance::ProRussian => Some(&mut self.pro_russian),
            Stance::ProUkrainian => Some(&mut self.pro_ukrainian),
            Stance::Neutral => None,
        }
    }
}

/// One item per candidate tweet. A tweet supporting several candidates keeps
/// its most confident one. Highest confidence first.
pub fn build_queue(candidates: &[CandidateEdge], corpus: &Corpus) -> Vec<TriageItem> {
    let mut best: HashMap<&str, (f64, Stance, &EdgeKey)> = HashMap::new();
    for c in candidates {
        for s in &c.support {
            let entry = best.entry(&s.tweet_id).or_insert((s.confidence, c.class, &c.edge));
            if s.confidence > entry.0 || (s.confidence == entry.0 && c.class < entry.1) {
                *entry = (s.confidence, c.class, &c.edge);
            }
        }
    }
    let mut items: Vec<TriageItem> = best
        .into_iter()
        .map(|(tweet_id, (confidence, class, edge))| TriageItem {
            item_id: tweet_id.to_string(),
            tweet_id: tweet_id.to_string(),
            raw_text: corpus.tweet(tweet_id).map(|t| t.raw_text.clone()).unwrap_or_default(),
            predicted_class: class,
            confidence,
            edge: edge.clone(),
            state: ItemState::Pending,
        })
        .collect();
    items.sort_by(|x, y| {
        y.confidence
            .total_cmp(&x.confidence)
            .then_with(|| x.item_id.cmp(&y.item_id))
    });
    items
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub decision: AnnotationDecision,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriageOutcome {
    pub graph: RetweetGraph,
    pub labels: BTreeMap<String, StanceLabel>,
    pub items: Vec<TriageItem>,
    pub stats: TriageStats,
    pub rejected: Vec<Rejection>,
}

/// Folds a decision log into the labeled graph. Later decisions on the same
/// item replace earlier ones. Non-skip verdicts become tweet labels with
/// [`Provenance::TriageConfirmed`] and the affected edges are relabeled.
pub fn apply_decisions(
    graph: &RetweetGraph,
    labels: &BTreeMap<String, StanceLabel>,
    items: &[TriageItem],
    decisions: &[AnnotationDecision],
) -> TriageOutcome {
    let index: HashMap<&str, usize> = items
        .iter()
        .enumerate()
        .map(|(i, it)| (it.item_id.as_str(), i))
        .collect();
    let mut latest: BTreeMap<usize, Verdict> = BTreeMap::new();
    let mut rejected = Vec::new();
    for d in decisions {
        match index.get(d.item_id.as_str()) {
            Some(&i) => {
                latest.insert(i, d.verdict);
            }
            None => rejected.push(Rejection {
                decision: d.clone(),
                reason: format!("unknown item {}", d.item_id),
            }),
        }
    }

    let mut items = items.to_vec();
    let mut next_labels = labels.clone();
    let mut touched = BTreeSet::new();
    let mut stats = TriageStats::default();
    for (i, item) in items.iter_mut().enumerate() {
        let Some(s) = stats.get_mut(item.predicted_class) else {
            continue;
        };
        match latest.get(&i).copied() {
            None => {
                item.state = ItemState::Pending;
                s.pending += 1;
            }
            Some(Verdict::Skip) => {
                item.state = ItemState::Skipped;
                s.reviewed += 1;
                s.skipped += 1;
            }
            Some(v) => {
                let class = v.class().expect("non-skip verdict");
                item.state = ItemState::Decided;
                s.reviewed += 1;
                s.decided += 1;
                s.confirmed += (class == item.predicted_class) as usize;
                next_labels.insert(
                    item.tweet_id.clone(),
                    StanceLabel::new(class, Provenance::TriageConfirmed),
                );
                touched.insert(item.edge.clone());
            }
        }
    }

    let mut next = graph.clone();
    relabel(&mut next, &touched, &next_labels);
    for key in &touched {
        let before = graph.edge(key).map(|r| r.label.status);
        let after = next.edge(key).map(|r| r.label.status);
        if before == Some(EdgeStatus::Unlabeled) {
            if let Some(s) = after.and_then(|a| a.class()).and_then(|c| stats.get_mut(c)) {
                s.new_edges += 1;
            }
        }
    }
    stats.pro_russian.update_hit_rate();
    stats.pro_ukrainian.update_hit_rate();

    TriageOutcome {
        graph: next,
        labels: next_labels,
        items,
        stats,
        rejected,
    }
}

/// Edge summary table: labeled edges per class, candidate edges, and edges
/// added by triage with hit rates.
pub fn edge_table(graph: &RetweetGraph, candidates: &[CandidateEdge], stats: Option<&TriageStats>) -> String {
    let counts = graph.status_counts();
    let n = |s: EdgeStatus| counts.get(&s).copied().unwrap_or(0);
    let (r, u, neu, conf) = (
        n(EdgeStatus::ProRussian),
        n(EdgeStatus::ProUkrainian),
        n(EdgeStatus::Neutral),
        n(EdgeStatus::Conflicted),
    );
    let cand = |c: Stance| candidates.iter().filter(|x| x.class == c).count();
    let (cr, cu) = (cand(Stance::ProRussian), cand(Stance::ProUkrainian));

    let mut s = String::new();
    let row = |s: &mut String, name: &str, a: String, b: String, c: String, t: String| {
        let _ = writeln!(s, "{name:<28}{a:>12}{b:>14}{c:>10}{t:>10}");
    };
    row(
        &mut s,
        "",
        "pro_russian".into(),
        "pro_ukrainian".into(),
        "neutral".into(),
        "total".into(),
    );
    row(
        &mut s,
        "labeled edges",
        r.to_string(),
        u.to_string(),
        neu.to_string(),
        (r + u + neu + conf).to_string(),
    );
    row(
        &mut s,
        "conflicted edges",
        "-".into(),
        "-".into(),
        "-".into(),
        conf.to_string(),
    );
    row(
        &mut s,
        "candidate edges",
        cr.to_string(),
        cu.to_string(),
        "-".into(),
        (cr + cu).to_string(),
    );
    if let Some(st) = stats {
        let (a, b) = (&st.pro_russian, &st.pro_ukrainian);
        let pct = |h: Option<f64>| h.map_or_else(|| "-".to_string(), |x| format!("{:.0}%", x * 100.0));
        let total_rev = a.reviewed + b.reviewed;
        let total_new = a.new_edges + b.new_edges;
        let total_rate = (total_rev > 0).then(|| total_new as f64 / total_rev as f64);
        row(
            &mut s,
            "added after filtering",
            a.new_edges.to_string(),
            b.new_edges.to_string(),
            "-".into(),
            total_new.to_string(),
        );
        row(
            &mut s,
            "tweets reviewed",
            a.reviewed.to_string(),
            b.reviewed.to_string(),
            "-".into(),
            total_rev.to_string(),
        );
        row(
            &mut s,
            "hit rate",
            pct(a.hit_rate),
            pct(b.hit_rate),
            "-".into(),
            pct(total_rate),
        );
    }
    let _ = writeln!(s, "{:<28}{:>46}", "total edges", graph.edge_count());
    s
}
