mod common;

use std::collections::BTreeMap;

use common::{decision, fixture, item};
use proptest::prelude::*;
use stance_core::network::{apply_decisions, ClassStats, EdgeKey, EdgeStatus, ItemState, TriageStats, Verdict};
use stance_core::Stance;
use stance_triage::{load_queue, write_queue, Error, TriageState};

#[test]
fn fresh_state_has_only_pending() {
    let (_, items) = fixture();
    let st = TriageState::new(items).unwrap();
    assert_eq!(st.stats().pro_russian.pending, 4);
    assert_eq!(st.stats().pro_ukrainian.pending, 4);
    assert_eq!(st.stats().pro_russian.hit_rate, None);
    assert!(TriageState::new(vec![]).unwrap().queue(None, 10).is_empty());
}

#[test]
fn queue_filters_limits_and_orders() {
    let (_, items) = fixture();
    let st = TriageState::new(items).unwrap();
    let top: Vec<String> = st.queue(None, 2).into_iter().map(|i| i.item_id).collect();
    assert_eq!(top, ["t4", "t0"]);
    let r = st.queue(Some(Stance::ProRussian), 100);
    assert_eq!(
        r.iter().map(|i| i.confidence).collect::<Vec<_>>(),
        [0.95, 0.91, 0.88, 0.83]
    );
}

#[test]
fn decided_items_leave_the_queue() {
    let (_, items) = fixture();
    let mut st = TriageState::new(items).unwrap();
    st.apply(&decision("t4", Verdict::Skip, 1)).unwrap();
    st.apply(&decision("t0", Verdict::Neutral, 2)).unwrap();
    let left = st.queue(None, 100);
    assert_eq!(left.len(), 6);
    assert!(left
        .iter()
        .all(|i| i.state == ItemState::Pending && i.item_id != "t4" && i.item_id != "t0"));
}

#[test]
fn confirming_the_only_item_labels_the_edge() {
    let items = vec![item("x", Stance::ProRussian, 0.9, "u", "v")];
    let mut st = TriageState::new(items).unwrap();
    let s = st.apply(&decision("x", Verdict::ProRussian, 1)).unwrap().pro_russian;
    assert_eq!(
        (s.reviewed, s.decided, s.confirmed, s.new_edges, s.pending),
        (1, 1, 1, 1, 0)
    );
    assert_eq!(s.hit_rate, Some(1.0));
}

#[test]
fn skip_reviews_without_confirming() {
    let items = vec![item("x", Stance::ProUkrainian, 0.9, "u", "v")];
    let mut st = TriageState::new(items).unwrap();
    let s = st.apply(&decision("x", Verdict::Skip, 1)).unwrap().pro_ukrainian;
    assert_eq!((s.reviewed, s.skipped, s.confirmed, s.new_edges), (1, 1, 0, 0));
}

#[test]
fn later_verdict_replaces_earlier() {
    let items = vec![item("x", Stance::ProRussian, 0.9, "u", "v")];
    let mut st = TriageState::new(items).unwrap();
    st.apply(&decision("x", Verdict::ProRussian, 1)).unwrap();
    let s = st.apply(&decision("x", Verdict::Skip, 2)).unwrap().pro_russian;
    assert_eq!(
        (s.reviewed, s.decided, s.skipped, s.confirmed, s.new_edges),
        (1, 0, 1, 0, 0)
    );
    assert_eq!(st.item("x").unwrap().state, ItemState::Skipped);
}

#[test]
fn rejects_unknown_items_and_bad_queues() {
    let (_, items) = fixture();
    let mut st = TriageState::new(items.clone()).unwrap();
    let before = st.clone();
    assert!(matches!(
        st.apply(&decision("zz", Verdict::Skip, 1)),
        Err(Error::UnknownItem(_))
    ));
    assert_eq!(st, before);

    let mut dup = items.clone();
    dup.push(items[0].clone());
    assert!(matches!(TriageState::new(dup), Err(Error::InvalidQueue(_))));
    let neutral = vec![item("n", Stance::Neutral, 0.9, "a", "b")];
    assert!(matches!(TriageState::new(neutral), Err(Error::InvalidQueue(_))));
    let over = vec![item("n", Stance::ProRussian, 1.5, "a", "b")];
    assert!(matches!(TriageState::new(over), Err(Error::InvalidQueue(_))));
}

#[test]
fn queue_file_round_trip() {
    let (_, items) = fixture();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("queue.jsonl");
    let mut buf = Vec::new();
    write_queue(&items, &mut buf).unwrap();
    std::fs::write(&path, &buf).unwrap();
    assert_eq!(load_queue(&path).unwrap(), items);
    std::fs::write(&path, "{\"item_id\": 3}\n").unwrap();
    assert!(matches!(load_queue(&path), Err(Error::InvalidQueue(_))));
}

#[test]
fn stats_at_full_review_scale() {
    let mut items = Vec::new();
    for i in 0..415 {
        items.push(item(&format!("t{i}"), Stance::ProRussian, 0.9, &format!("u{i}"), "hub"));
    }
    let mut st = TriageState::new(items).unwrap();
    for i in 0..415 {
        let v = if i < 77 {
            Verdict::ProRussian
        } else if i % 2 == 0 {
            Verdict::Neutral
        } else {
            Verdict::Skip
        };
        st.apply(&decision(&format!("t{i}"), v, i)).unwrap();
    }
    let s = st.stats().pro_russian;
    assert_eq!((s.reviewed, s.new_edges, s.confirmed), (415, 77, 77));
    assert_eq!((s.hit_rate.unwrap() * 100.0).round(), 19.0);
}

fn verdict() -> impl Strategy<Value = Verdict> {
    prop_oneof![
        Just(Verdict::ProRussian),
        Just(Verdict::ProUkrainian),
        Just(Verdict::Neutral),
        Just(Verdict::Skip)
    ]
}

fn check_identities(s: &ClassStats) -> bool {
    s.reviewed == s.decided + s.skipped && s.confirmed <= s.decided && (s.hit_rate.is_none() == (s.reviewed == 0))
}

proptest! {
    #[test]
    fn incremental_equals_batch(log in prop::collection::vec((0usize..8, verdict()), 0..40)) {
        let (graph, items) = fixture();
        let decisions: Vec<_> = log.iter().enumerate().map(|(i, (k, v))| decision(&format!("t{k}"), *v, i as i64)).collect();
        let mut st = TriageState::new(items.clone()).unwrap();
        for d in &decisions {
            st.apply(d).unwrap();
            prop_assert!(check_identities(&st.stats().pro_russian) && check_identities(&st.stats().pro_ukrainian));
        }
        let batch = apply_decisions(&graph, &BTreeMap::new(), &items, &decisions);
        prop_assert_eq!(*st.stats(), batch.stats);
        prop_assert_eq!(st.items(), &batch.items[..]);
        prop_assert!(batch.rejected.is_empty());
        let polarized = |c| batch.graph.edges().values().filter(|r| r.label.status == c).count();
        prop_assert_eq!(st.stats().pro_russian.new_edges, polarized(EdgeStatus::ProRussian));
        prop_assert_eq!(st.stats().pro_ukrainian.new_edges, polarized(EdgeStatus::ProUkrainian));
        prop_assert!(batch.graph.edge(&EdgeKey::new("a", "b").unwrap()).is_some());
    }

    #[test]
    fn replaying_reaches_same_state_regardless_of_superseded_history(
        log in prop::collection::vec((0usize..8, verdict()), 0..30),
    ) {
        let (_, items) = fixture();
        let decisions: Vec<_> = log.iter().enumerate().map(|(i, (k, v))| decision(&format!("t{k}"), *v, i as i64)).collect();
        let mut full = TriageState::new(items.clone()).unwrap();
        for d in &decisions {
            full.apply(d).unwrap();
        }
        let mut last: BTreeMap<&str, &_> = BTreeMap::new();
        for d in &decisions {
            last.insert(d.item_id.as_str(), d);
        }
        let mut compact = TriageState::new(items).unwrap();
        for d in last.values() {
            compact.apply(d).unwrap();
        }
        prop_assert_eq!(full.stats(), compact.stats());
    }
}

#[test]
fn default_stats_serialize_with_null_hit_rate() {
    let v = serde_json::to_value(TriageStats::default()).unwrap();
    assert_eq!(v["pro_russian"]["hit_rate"], serde_json::Value::Null);
    assert_eq!(v["pro_ukrainian"]["reviewed"], 0);
}
