//! Retweet network: users as nodes, an undirected edge wherever one user
//! retweeted the other. Edges are labeled from tweet annotations and pruned
//! to a k-core; unlabeled edges with confident predictions become triage
//! candidates.

mod candidates;
mod triage;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use candidates::{candidate_edges, CandidateEdge, Support};
pub use triage::{
    apply_decisions, build_queue, edge_table, AnnotationDecision, ClassStats, ItemState, Rejection, TriageItem,
    TriageOutcome, TriageStats, Verdict,
};

use crate::corpus::Corpus;
use crate::{Error, Result, Stance, StanceLabel};

/// Unordered user pair, stored with the smaller id first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(String, String)", into = "(String, String)")]
pub struct EdgeKey {
    a: String,
    b: String,
}

impl EdgeKey {
    /// `None` for a self-loop.
    pub fn new(x: &str, y: &str) -> Option<EdgeKey> {
        match x.cmp(y) {
            std::cmp::Ordering::Less => Some(EdgeKey {
                a: x.into(),
                b: y.into(),
            }),
            std::cmp::Ordering::Greater => Some(EdgeKey {
                a: y.into(),
                b: x.into(),
            }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn a(&self) -> &str {
        &self.a
    }

    pub fn b(&self) -> &str {
        &self.b
    }
}

impl TryFrom<(String, String)> for EdgeKey {
    type Error = String;

    fn try_from((x, y): (String, String)) -> std::result::Result<Self, String> {
        EdgeKey::new(&x, &y).ok_or_else(|| format!("self-loop edge {x}"))
    }
}

impl From<EdgeKey> for (String, String) {
    fn from(k: EdgeKey) -> Self {
        (k.a, k.b)
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeStatus {
    #[default]
    Unlabeled,
    ProRussian,
    ProUkrainian,
    Neutral,
    Conflicted,
}

impl EdgeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeStatus::Unlabeled => "unlabeled",
            EdgeStatus::ProRussian => "pro_russian",
            EdgeStatus::ProUkrainian => "pro_ukrainian",
            EdgeStatus::Neutral => "neutral",
            EdgeStatus::Conflicted => "conflicted",
        }
    }

    /// An edge is polarized if any of its tweets is pro-Russian or
    /// pro-Ukrainian; both at once is a conflict.
    pub fn from_evidence(evidence: [usize; 3]) -> EdgeStatus {
        let [r, u, n] = evidence;
        match (r > 0, u > 0) {
            (true, true) => EdgeStatus::Conflicted,
            (true, false) => EdgeStatus::ProRussian,
            (false, true) => EdgeStatus::ProUkrainian,
            (false, false) if n > 0 => EdgeStatus::Neutral,
            _ => EdgeStatus::Unlabeled,
        }
    }

    pub fn class(self) -> Option<Stance> {
        match self {
            EdgeStatus::ProRussian => Some(Stance::ProRussian),
            EdgeStatus::ProUkrainian => Some(Stance::ProUkrainian),
            EdgeStatus::Neutral => Some(Stance::Neutral),
            _ => None,
        }
    }
}

impl fmt::Display for EdgeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            EdgeStatus::Unlabeled,
            EdgeStatus::ProRussian,
            EdgeStatus::ProUkrainian,
            EdgeStatus::Neutral,
            EdgeStatus::Conflicted,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
        .ok_or_else(|| format!("unknown edge status {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub status: EdgeStatus,
    /// Labeled tweets on the edge per class, indexed by [`Stance::index`].
    pub evidence: [usize; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub tweet_ids: BTreeSet<String>,
    pub label: EdgeLabel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetweetGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<EdgeKey, EdgeRecord>,
}

impl RetweetGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a retweet between two users. Self-retweets are ignored.
    pub fn add_retweet(&mut self, x: &str, y: &str, tweet_id: &str) -> bool {
        let Some(key) = EdgeKey::new(x, y) else {
            return false;
        };
        self.nodes.insert(x.to_string());
        self.nodes.insert(y.to_string());
        self.edges
            .entry(key)
            .or_default()
            .tweet_ids
            .insert(tweet_id.to_string());
        true
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<EdgeKey, EdgeRecord> {
        &self.edges
    }

    pub fn edge(&self, key: &EdgeKey) -> Option<&EdgeRecord> {
        self.edges.get(key)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self) -> HashMap<&str, BTreeSet<&str>> {
        let mut adj: HashMap<&str, BTreeSet<&str>> = self.nodes.iter().map(|n| (n.as_str(), BTreeSet::new())).collect();
        for k in self.edges.keys() {
            adj.entry(&k.a).or_default().insert(&k.b);
            adj.entry(&k.b).or_default().insert(&k.a);
        }
        adj
    }

    /// Map from each edge tweet to the edge carrying it.
    pub fn tweet_edges(&self) -> HashMap<&str, &EdgeKey> {
        self.edges
            .iter()
            .flat_map(|(k, r)| r.tweet_ids.iter().map(move |t| (t.as_str(), k)))
            .collect()
    }

    /// Subgraph induced by `keep`.
    pub fn induced(&self, keep: &BTreeSet<String>) -> RetweetGraph {
        RetweetGraph {
            nodes: self.nodes.intersection(keep).cloned().collect(),
            edges: self
                .edges
                .iter()
                .filter(|(k, _)| keep.contains(&k.a) && keep.contains(&k.b))
                .map(|(k, r)| (k.clone(), r.clone()))
                .collect(),
        }
    }

    pub fn status_counts(&self) -> BTreeMap<EdgeStatus, usize> {
        let mut counts = BTreeMap::new();
        for r in self.edges.values() {
            *counts.entry(r.label.status).or_insert(0) += 1;
        }
        counts
    }

    /// Edge list, one line per edge:
    /// `user_a<TAB>user_b<TAB>status<TAB>tweet_ids` with ids comma-joined.
    /// Isolated nodes and label evidence are not written.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, r) in &self.edges {
            let ids: Vec<&str> = r.tweet_ids.iter().map(String::as_str).collect();
            out.push_str(&format!("{}\t{}\t{}\t{}\n", k.a, k.b, r.label.status, ids.join(",")));
        }
        out
    }

    /// Reads [`RetweetGraph::to_tsv`] output. Evidence counts come back as
    /// zero; run [`label_edges`] to restore them.
    pub fn from_tsv(text: &str) -> Result<RetweetGraph> {
        let mut g = RetweetGraph::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse {
                what: "graph",
                line: i + 1,
                reason,
            };
            let cols: Vec<&str> = line.split('\t').collect();
            let [a, b, status, ids] = cols[..] else {
                return Err(err(format!("expected 4 columns, got {}", cols.len())));
            };
            let key = EdgeKey::new(a, b).ok_or_else(|| err("self-loop".into()))?;
            let status: EdgeStatus = status.parse().map_err(err)?;
            let tweet_ids: BTreeSet<String> = ids.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect();
            if tweet_ids.is_empty() {
                return Err(err("edge without tweets".into()));
            }
            if g.edges.contains_key(&key) {
                return Err(err(format!("duplicate edge {a} {b}")));
            }
            g.nodes.insert(key.a.clone());
            g.nodes.insert(key.b.clone());
            g.edges.insert(
                key,
                EdgeRecord {
                    tweet_ids,
                    label: EdgeLabel {
                        status,
                        evidence: [0; 3],
                    },
                },
            );
        }
        Ok(g)
    }
}

/// One edge per pair of users with a retweet between them. A retweet points
/// at the author of its group's original; when the group has no
/// non-retweet member the handle in the `RT @user` prefix is used instead.
pub fn build_graph(corpus: &Corpus) -> RetweetGraph {
    let mut g = RetweetGraph::new();
    for group in corpus.groups().values() {
        let orig_is_retweet = corpus.preprocessed(&group.original_id).is_none_or(|p| p.is_retweet);
        let orig_author = corpus.tweet(&group.original_id).map(|t| t.user_id.as_str());
        for id in &group.member_ids {
            let (Some(t), Some(p)) = (corpus.tweet(id), corpus.preprocessed(id)) else {
                continue;
            };
            if !p.is_retweet {
                continue;
            }
            let target = if orig_is_retweet {
                p.retweeted_user.as_deref()
            } else {
                orig_author
            };
            if let Some(target) = target {
                g.add_retweet(&t.user_id, target, id);
            }
        }
    }
    g
}

/// Repeatedly removes nodes with fewer than `k` distinct neighbors and
/// returns the induced subgraph on the survivors.
pub fn k_core(graph: &RetweetGraph, k: usize) -> RetweetGraph {
    let adj = graph.neighbors();
    let mut degree: HashMap<&str, usize> = adj.iter().map(|(n, s)| (*n, s.len())).collect();
    let mut removed: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = graph
        .nodes
        .iter()
        .map(String::as_str)
        .filter(|n| degree[n] < k)
        .collect();
    while let Some(n) = queue.pop_front() {
        if !removed.insert(n) {
            continue;
        }
        for &m in &adj[n] {
            if removed.contains(m) {
                continue;
            }
            let d = degree.get_mut(m).expect("neighbor is a node");
            *d -= 1;
            if *d + 1 == k {
                queue.push_back(m);
            }
        }
    }
    let keep: BTreeSet<String> = graph
        .nodes
        .iter()
        .filter(|n| !removed.contains(n.as_str()))
        .cloned()
        .collect();
    graph.induced(&keep)
}

fn label_record(record: &mut EdgeRecord, labels: &BTreeMap<String, StanceLabel>) {
    let mut evidence = [0usize; 3];
    for id in &record.tweet_ids {
        if let Some(l) = labels.get(id) {
            evidence[l.class.index()] += 1;
        }
    }
    record.label = EdgeLabel {
        status: EdgeStatus::from_evidence(evidence),
        evidence,
    };
}

/// Recomputes every edge label from tweet labels.
pub fn label_edges(graph: &RetweetGraph, labels: &BTreeMap<String, StanceLabel>) -> RetweetGraph {
    let mut g = graph.clone();
    for r in g.edges.values_mut() {
        label_record(r, labels);
    }
    g
}

pub(crate) fn relabel(graph: &mut RetweetGraph, keys: &BTreeSet<EdgeKey>, labels: &BTreeMap<String, StanceLabel>) {
    for k in keys {
        if let Some(r) = graph.edges.get_mut(k) {
            label_record(r, labels);
        }
    }
}
