use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;

use crate::rng::Rng;
use crate::Stance;

/// Pointwise mutual information between hashtags and classes,
/// `pmi(hs, c) = ln(p(hs, c) / (p(hs) p(c)))` over tweet-level frequencies.
/// Pairs that never co-occur score `-inf`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PmiTable {
    scores: BTreeMap<String, [f64; 3]>,
}

pub fn compute_pmi(labeled: &[(BTreeSet<String>, Stance)]) -> PmiTable {
    let n = labeled.len() as f64;
    let mut class_counts = [0usize; 3];
    let mut joint: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for (tags, class) in labeled {
        class_counts[class.index()] += 1;
        for t in tags {
            joint.entry(t.as_str()).or_default()[class.index()] += 1;
        }
    }
    let scores = joint
        .into_iter()
        .map(|(tag, counts)| {
            let tag_count: usize = counts.iter().sum();
            let row = std::array::from_fn(|c| {
                if counts[c] == 0 {
                    f64::NEG_INFINITY
                } else {
                    let p_joint = counts[c] as f64 / n;
                    let p_tag = tag_count as f64 / n;
                    let p_class = class_counts[c] as f64 / n;
                    (p_joint / (p_tag * p_class)).ln()
                }
            });
            (tag.to_string(), row)
        })
        .collect();
    PmiTable { scores }
}

impl PmiTable {
    pub fn from_scores(scores: BTreeMap<String, [f64; 3]>) -> Self {
        PmiTable { scores }
    }

    pub fn scores(&self) -> &BTreeMap<String, [f64; 3]> {
        &self.scores
    }

    pub fn score(&self, hashtag: &str, class: Stance) -> f64 {
        self.scores.get(hashtag).map_or(f64::NEG_INFINITY, |s| s[class.index()])
    }

    /// Classes whose best hashtag score is maximal. Empty when no hashtag has
    /// a finite score for any class.
    pub fn best_classes(&self, hashtags: &BTreeSet<String>) -> Vec<Stance> {
        let best = Stance::ALL.map(|c| {
            hashtags
                .iter()
                .map(|h| self.score(h, c))
                .fold(f64::NEG_INFINITY, f64::max)
        });
        let top = best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Vec::new();
        }
        Stance::ALL.into_iter().filter(|c| best[c.index()] == top).collect()
    }

    /// Highest-PMI class; no evidence or ties are resolved uniformly at random.
    pub fn predict(&self, hashtags: &BTreeSet<String>, rng: &mut Rng) -> Stance {
        match self.best_classes(hashtags).as_slice() {
            [] => Stance::ALL[rng.gen_range(0..Stance::COUNT)],
            [only] => *only,
            tied => tied[rng.gen_range(0..tied.len())],
        }
    }
}
