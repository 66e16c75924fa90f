//! Seeded generator for a labeled toy corpus with matching word vectors and
//! retweet activity, for tests, demos and benchmarks.
//!
//! Each class owns a disjoint set of trigger words. Every tweet carries one
//! or two triggers of its true class mixed into shared filler words; some
//! tweets also carry a class hashtag. Observed labels are the true class,
//! except that with probability `label_noise` the label is redrawn from the
//! class prior, which keeps the class proportions intact.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::corpus::{preprocess, Tweet};
use crate::embeddings::EmbeddingTable;
use crate::rng::{self, Rng};
use crate::{Result, Stance, StanceLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    /// Labeled original tweets.
    pub labeled: usize,
    /// Unlabeled original tweets, the pool that triage candidates come from.
    pub unlabeled: usize,
    /// Relative class frequencies, pro-Russian / pro-Ukrainian / neutral.
    pub class_weights: [f64; 3],
    pub label_noise: f64,
    pub dim: usize,
    /// Scale of each class's trigger centroid in embedding space.
    pub trigger_scale: f64,
    /// Per-word spread of trigger vectors around their centroid.
    pub trigger_spread: f64,
    pub triggers_per_class: usize,
    pub fillers: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub hashtags_per_class: usize,
    /// Chance that a tweet carries a hashtag of its true class.
    pub class_hashtag_rate: f64,
    pub shared_hashtags: usize,
    pub shared_hashtag_rate: f64,
    /// User activity falls off as `1 / rank`, so a few users author and
    /// retweet most tweets.
    pub users: usize,
    /// Each original is retweeted `0..=max_retweets` times, uniformly.
    pub max_retweets: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            labeled: 1500,
            unlabeled: 500,
            class_weights: [512.0, 910.0, 6923.0],
            label_noise: 0.2,
            dim: 10,
            trigger_scale: 3.0,
            trigger_spread: 0.5,
            triggers_per_class: 8,
            fillers: 400,
            min_len: 6,
            max_len: 16,
            hashtags_per_class: 3,
            class_hashtag_rate: 0.3,
            shared_hashtags: 10,
            shared_hashtag_rate: 0.3,
            users: 150,
            max_retweets: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub tweets: Vec<Tweet>,
    /// Observed, possibly noisy labels of the labeled originals.
    pub labels: BTreeMap<String, StanceLabel>,
    /// Class each original was generated from, labeled or not.
    pub true_classes: BTreeMap<String, Stance>,
    pub embeddings: EmbeddingTable,
}

const CLASS_PREFIX: [&str; 3] = ["ru", "ua", "nt"];
const START_TS: i64 = 1_405_555_200;

pub fn trigger_words(cfg: &SyntheticConfig, class: Stance) -> Vec<String> {
    (0..cfg.triggers_per_class)
        .map(|i| format!("{}{i}", CLASS_PREFIX[class.index()]))
        .collect()
}

fn class_hashtags(cfg: &SyntheticConfig, class: Stance) -> Vec<String> {
    (0..cfg.hashtags_per_class)
        .map(|i| format!("{}tag{i}", CLASS_PREFIX[class.index()]))
        .collect()
}

/// Splits `n` in proportion to `weights` by largest remainder.
pub fn apportion(n: usize, weights: &[f64; 3]) -> [usize; 3] {
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: [usize; 3] = std::array::from_fn(|i| exact[i].floor() as usize);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    let mut left = n - counts.iter().sum::<usize>();
    for i in order {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

fn tweet_text(cfg: &SyntheticConfig, class: Stance, rng: &mut Rng) -> String {
    let len = rng.gen_range(cfg.min_len..=cfg.max_len);
    let n_trig = rng.gen_range(1..=2);
    let triggers = trigger_words(cfg, class);
    let mut words: Vec<String> = (0..len - n_trig)
        .map(|_| format!("w{}", rng.gen_range(0..cfg.fillers)))
        .collect();
    for _ in 0..n_trig {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, triggers.choose(rng).expect("triggers").clone());
    }
    if rng.gen_bool(cfg.class_hashtag_rate) {
        words.push(format!(
            "#{}",
            class_hashtags(cfg, class).choose(rng).expect("hashtags")
        ));
    }
    if cfg.shared_hashtags > 0 && rng.gen_bool(cfg.shared_hashtag_rate) {
        words.push(format!("#news{}", rng.gen_range(0..cfg.shared_hashtags)));
    }
    words.join(" ")
}

fn gaussian(dim: usize, scale: f64, rng: &mut Rng) -> Vec<f64> {
    (0..dim)
        .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

/// Filler and hashtag words get standard normal vectors. Trigger words of a
/// class sit around a shared class centroid.
fn embeddings(cfg: &SyntheticConfig, rng: &mut Rng) -> Result<EmbeddingTable> {
    let mut vocab: Vec<String> = (0..cfg.fillers).map(|i| format!("w{i}")).collect();
    for c in Stance::ALL {
        vocab.extend(class_hashtags(cfg, c));
    }
    vocab.extend((0..cfg.shared_hashtags).map(|i| format!("news{i}")));
    let mut vectors: HashMap<String, Vec<f64>> = vocab.into_iter().map(|w| (w, gaussian(cfg.dim, 1.0, rng))).collect();
    for c in Stance::ALL {
        let centroid = gaussian(cfg.dim, cfg.trigger_scale, rng);
        for w in trigger_words(cfg, c) {
            let v = gaussian(cfg.dim, cfg.trigger_spread, rng)
                .iter()
                .zip(&centroid)
                .map(|(a, b)| a + b)
                .collect();
            vectors.insert(w, v);
        }
    }
    EmbeddingTable::new(cfg.dim, vectors)
}

/// Generates the corpus. Labeled originals come first in class proportion
/// (`apportion`), in shuffled order, then unlabeled originals, then retweets.
pub fn generate(cfg: &SyntheticConfig, seed: u64) -> Result<SyntheticCorpus> {
    let mut text_rng = rng::stream(seed, 0);
    let mut noise_rng = rng::stream(seed, 1);
    let mut social_rng = rng::stream(seed, 2);
    let embeddings = embeddings(cfg, &mut rng::stream(seed, 3))?;
    let prior = WeightedIndex::new(cfg.class_weights).expect("positive class weights");

    let counts = apportion(cfg.labeled, &cfg.class_weights);
    let mut classes: Vec<Stance> = Stance::ALL
        .iter()
        .flat_map(|&c| std::iter::repeat_n(c, counts[c.index()]))
        .collect();
    classes.shuffle(&mut text_rng);
    classes.extend((0..cfg.unlabeled).map(|_| Stance::ALL[prior.sample(&mut text_rng)]));

    let users: Vec<String> = (0..cfg.users.max(2)).map(|i| format!("user{i:03}")).collect();
    let activity = WeightedIndex::new((0..users.len()).map(|i| 1.0 / (i + 1) as f64)).expect("positive weights");
    let mut seen_keys = BTreeSet::new();
    let mut tweets = Vec::new();
    let mut labels = BTreeMap::new();
    let mut true_classes = BTreeMap::new();
    for (i, &class) in classes.iter().enumerate() {
        let text = loop {
            let t = tweet_text(cfg, class, &mut text_rng);
            if seen_keys.insert(preprocess(&t).canonical_key) {
                break t;
            }
        };
        let id = format!("s{i:05}");
        if i < cfg.labeled {
            let observed = if noise_rng.gen_bool(cfg.label_noise) {
                Stance::ALL[prior.sample(&mut noise_rng)]
            } else {
                class
            };
            labels.insert(id.clone(), StanceLabel::manual(observed));
        }
        true_classes.insert(id.clone(), class);
        tweets.push(Tweet {
            id,
            user_id: users[activity.sample(&mut social_rng)].clone(),
            timestamp: START_TS + 60 * i as i64,
            raw_text: text,
            language: Some("en".into()),
        });
    }

    let originals = tweets.len();
    for i in 0..originals {
        let (author, ts, text) = (
            tweets[i].user_id.clone(),
            tweets[i].timestamp,
            tweets[i].raw_text.clone(),
        );
        for r in 0..social_rng.gen_range(0..=cfg.max_retweets) {
            let user = loop {
                let u = &users[activity.sample(&mut social_rng)];
                if *u != author {
                    break u.clone();
                }
            };
            tweets.push(Tweet {
                id: format!("s{i:05}r{r}"),
                user_id: user,
                timestamp: ts + 1 + social_rng.gen_range(0..3600),
                raw_text: format!("RT @{author}: {text}"),
                language: Some("en".into()),
            });
        }
    }

    Ok(SyntheticCorpus {
        tweets,
        labels,
        true_classes,
        embeddings,
    })
}
