#![allow(dead_code)]

use std::collections::BTreeMap;

use stance_core::network::{label_edges, AnnotationDecision, EdgeKey, ItemState, RetweetGraph, TriageItem, Verdict};
use stance_core::Stance;

pub fn item(id: &str, class: Stance, confidence: f64, a: &str, b: &str) -> TriageItem {
    TriageItem {
        item_id: id.into(),
        tweet_id: id.into(),
        raw_text: format!("text of {id}"),
        predicted_class: class,
        confidence,
        edge: EdgeKey::new(a, b).unwrap(),
        state: ItemState::Pending,
    }
}

pub fn decision(id: &str, verdict: Verdict, at: i64) -> AnnotationDecision {
    AnnotationDecision {
        item_id: id.into(),
        verdict,
        annotator_id: "ann1".into(),
        decided_at: at,
    }
}

/// Eight items on four unlabeled edges; edges `e0` and `e1` carry two items.
pub fn fixture() -> (RetweetGraph, Vec<TriageItem>) {
    let specs = [
        ("t0", Stance::ProRussian, 0.95, "a", "b"),
        ("t1", Stance::ProUkrainian, 0.85, "a", "b"),
        ("t2", Stance::ProRussian, 0.91, "c", "d"),
        ("t3", Stance::ProRussian, 0.88, "c", "d"),
        ("t4", Stance::ProUkrainian, 0.97, "e", "f"),
        ("t5", Stance::ProUkrainian, 0.81, "g", "h"),
        ("t6", Stance::ProRussian, 0.83, "g", "h"),
        ("t7", Stance::ProUkrainian, 0.90, "e", "f"),
    ];
    let mut g = RetweetGraph::new();
    let mut items = Vec::new();
    for (id, c, conf, a, b) in specs {
        g.add_retweet(a, b, id);
        items.push(item(id, c, conf, a, b));
    }
    g.add_retweet("a", "b", "unqueued");
    (label_edges(&g, &BTreeMap::new()), items)
}
