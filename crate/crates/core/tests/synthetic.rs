use stance_core::corpus::Corpus;
use stance_core::synthetic::*;
use stance_core::Stance;

#[test]
fn apportion_rescales_skew() {
    assert_eq!(apportion(1500, &[512.0, 910.0, 6923.0]), [92, 164, 1244]);
    assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), [4, 3, 3]);
    assert_eq!(apportion(0, &[1.0, 2.0, 3.0]), [0, 0, 0]);
}

fn small() -> SyntheticConfig {
    SyntheticConfig {
        labeled: 300,
        unlabeled: 50,
        ..Default::default()
    }
}

#[test]
fn structure() {
    let cfg = small();
    let s = generate(&cfg, 4).unwrap();
    let corpus = Corpus::new(s.tweets.clone(), s.labels.clone()).unwrap();
    let originals = corpus.labeled_originals();
    assert_eq!(originals.len(), 300);
    assert_eq!(corpus.groups().len(), 350);
    let observed = apportion(300, &cfg.class_weights);
    let noisy = originals.iter().filter(|(id, c)| s.true_classes[*id] != *c).count();
    assert!(noisy > 0 && noisy < 300 / 4, "{noisy}");
    let true_counts = Stance::ALL.map(|c| originals.iter().filter(|(id, _)| s.true_classes[*id] == c).count());
    assert_eq!(true_counts, observed);
    for t in corpus.tweets() {
        let p = corpus.preprocessed(&t.id).unwrap();
        let class = s.true_classes[&corpus.group_of(&t.id).unwrap().original_id];
        let trig = trigger_words(&cfg, class);
        assert!(p.tokens.iter().any(|w| trig.contains(w)));
        for other in Stance::ALL.into_iter().filter(|&c| c != class) {
            assert!(!p.tokens.iter().any(|w| trigger_words(&cfg, other).contains(w)));
        }
        assert!(p.tokens.iter().all(|w| s.embeddings.contains(w) || w.starts_with('<')));
    }
}

#[test]
fn seeded() {
    let a = generate(&small(), 1).unwrap();
    let b = generate(&small(), 1).unwrap();
    let c = generate(&small(), 2).unwrap();
    assert_eq!(a.tweets, b.tweets);
    assert_eq!(a.labels, b.labels);
    assert_eq!(a.embeddings, b.embeddings);
    assert_ne!(a.tweets, c.tweets);
}
