use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use stance_core::network::{AnnotationDecision, EdgeKey, EdgeStatus, ItemState, TriageItem, TriageStats, Verdict};
use stance_core::Stance;

use crate::{Error, Result};

/// Live review state, updated one decision at a time.
///
/// Queue edges are unlabeled when the queue is built, so an edge's status is
/// determined by the verdicts on its items alone.
#[derive(Debug, Clone, PartialEq)]
pub struct TriageState {
    items: Vec<TriageItem>,
    index: HashMap<String, usize>,
    verdicts: Vec<Option<Verdict>>,
    evidence: HashMap<EdgeKey, [usize; 3]>,
    stats: TriageStats,
}

impl TriageState {
    pub fn new(mut items: Vec<TriageItem>) -> Result<Self> {
        let mut index = HashMap::with_capacity(items.len());
        let mut tweets = HashSet::new();
        let mut stats = TriageStats::default();
        for (i, it) in items.iter_mut().enumerate() {
            if index.insert(it.item_id.clone(), i).is_some() {
                return Err(Error::InvalidQueue(format!("duplicate item {}", it.item_id)));
            }
            if !tweets.insert(it.tweet_id.clone()) {
                return Err(Error::InvalidQueue(format!("tweet {} queued twice", it.tweet_id)));
            }
            if !(0.0..=1.0).contains(&it.confidence) {
                return Err(Error::InvalidQueue(format!(
                    "item {} confidence {}",
                    it.item_id, it.confidence
                )));
            }
            let Some(s) = stats.get_mut(it.predicted_class) else {
                return Err(Error::InvalidQueue(format!(
                    "item {} predicts {}",
                    it.item_id, it.predicted_class
                )));
            };
            s.pending += 1;
            it.state = ItemState::Pending;
        }
        let n = items.len();
        Ok(TriageState {
            items,
            index,
            verdicts: vec![None; n],
            evidence: HashMap::new(),
            stats,
        })
    }

    pub fn items(&self) -> &[TriageItem] {
        &self.items
    }

    pub fn item(&self, item_id: &str) -> Option<&TriageItem> {
        self.index.get(item_id).map(|&i| &self.items[i])
    }

    pub fn stats(&self) -> &TriageStats {
        &self.stats
    }

    /// Up to `limit` pending items, optionally of one predicted class, most
    /// confident first.
    pub fn queue(&self, class: Option<Stance>, limit: usize) -> Vec<TriageItem> {
        let mut pending: Vec<&TriageItem> = self
            .items
            .iter()
            .filter(|it| it.state == ItemState::Pending && class.is_none_or(|c| it.predicted_class == c))
            .collect();
        pending.sort_by(|x, y| {
            y.confidence
                .total_cmp(&x.confidence)
                .then_with(|| x.item_id.cmp(&y.item_id))
        });
        pending.into_iter().take(limit).cloned().collect()
    }

    /// Applies one decision, replacing any earlier verdict on the same item.
    pub fn apply(&mut self, decision: &AnnotationDecision) -> Result<&TriageStats> {
        let &i = self
            .index
            .get(&decision.item_id)
            .ok_or_else(|| Error::UnknownItem(decision.item_id.clone()))?;
        let previous = self.verdicts[i].replace(decision.verdict);
        self.account(i, previous, -1);
        self.account(i, Some(decision.verdict), 1);
        self.items[i].state = match decision.verdict {
            Verdict::Skip => ItemState::Skipped,
            _ => ItemState::Decided,
        };
        self.stats.pro_russian.update_hit_rate();
        self.stats.pro_ukrainian.update_hit_rate();
        Ok(&self.stats)
    }

    fn account(&mut self, i: usize, verdict: Option<Verdict>, delta: isize) {
        let add = |x: &mut usize| *x = x.checked_add_signed(delta).expect("stat counter underflow");
        let predicted = self.items[i].predicted_class;
        let s = self.stats.get_mut(predicted).expect("validated class");
        match verdict {
            None => add(&mut s.pending),
            Some(Verdict::Skip) => {
                add(&mut s.reviewed);
                add(&mut s.skipped);
            }
            Some(v) => {
                add(&mut s.reviewed);
                add(&mut s.decided);
                if v.class() == Some(predicted) {
                    add(&mut s.confirmed);
                }
            }
        }
        let Some(class) = verdict.and_then(Verdict::class) else {
            return;
        };
        let ev = self.evidence.entry(self.items[i].edge.clone()).or_default();
        let before = EdgeStatus::from_evidence(*ev);
        add(&mut ev[class.index()]);
        let after = EdgeStatus::from_evidence(*ev);
        if before != after {
            if let Some(s) = before.class().and_then(|c| self.stats.get_mut(c)) {
                s.new_edges -= 1;
            }
            if let Some(s) = after.class().and_then(|c| self.stats.get_mut(c)) {
                s.new_edges += 1;
            }
        }
    }
}

/// Reads a queue file: one JSON [`TriageItem`] per line.
pub fn load_queue(path: &Path) -> Result<Vec<TriageItem>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::InvalidQueue(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn write_queue<W: Write>(items: &[TriageItem], mut out: W) -> std::io::Result<()> {
    for it in items {
        serde_json::to_writer(&mut out, it)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
