//! Tweet records, preprocessing, original/retweet grouping and label propagation.

mod io;
mod preprocess;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

pub use io::{
    ingest_corpus, load_labels, parse_corpus, write_corpus, write_labels, CorpusFormat, Ingested, TweetRecord,
};
pub use preprocess::{is_placeholder, preprocess, Preprocessed, RT_TOKEN, URL_TOKEN, USER_TOKEN};

use crate::{Error, Result, Stance, StanceLabel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub user_id: String,
    /// Seconds since the epoch.
    pub timestamp: i64,
    pub raw_text: String,
    pub language: Option<String>,
}

/// Tweets sharing one canonical key: an original plus its retweets and duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub key: String,
    pub original_id: String,
    /// All members, original included, sorted by id.
    pub member_ids: Vec<String>,
}

/// An immutable tweet collection with derived preprocessing and grouping.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    processed: Vec<Preprocessed>,
    index: HashMap<String, usize>,
    labels: BTreeMap<String, StanceLabel>,
    groups: BTreeMap<String, Group>,
    group_of: HashMap<String, String>,
    train_only: BTreeSet<String>,
}

impl Corpus {
    pub fn new(tweets: Vec<Tweet>, labels: BTreeMap<String, StanceLabel>) -> Result<Self> {
        Self::build(tweets, labels, BTreeSet::new())
    }

    fn build(tweets: Vec<Tweet>, labels: BTreeMap<String, StanceLabel>, train_only: BTreeSet<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tweets.len());
        for (i, t) in tweets.iter().enumerate() {
            if index.insert(t.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(t.id.clone()));
            }
        }
        if let Some(id) = labels.keys().find(|id| !index.contains_key(*id)) {
            return Err(Error::UnknownTweet(id.clone()));
        }
        let processed: Vec<Preprocessed> = tweets.iter().map(|t| preprocess(&t.raw_text)).collect();
        let groups = group_tweets(&tweets, &processed, &train_only);
        let mut group_of = HashMap::with_capacity(tweets.len());
        for g in groups.values() {
            for m in &g.member_ids {
                group_of.insert(m.clone(), g.key.clone());
            }
        }
        Ok(Corpus {
            tweets,
            processed,
            index,
            labels,
            groups,
            group_of,
            train_only,
        })
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn tweet(&self, id: &str) -> Option<&Tweet> {
        self.index.get(id).map(|&i| &self.tweets[i])
    }

    pub fn preprocessed(&self, id: &str) -> Option<&Preprocessed> {
        self.index.get(id).map(|&i| &self.processed[i])
    }

    /// Tweets paired with their preprocessing, in corpus order.
    pub fn iter(&self) -> impl Iterator<Item = (&Tweet, &Preprocessed)> {
        self.tweets.iter().zip(&self.processed)
    }

    pub fn labels(&self) -> &BTreeMap<String, StanceLabel> {
        &self.labels
    }

    pub fn label(&self, id: &str) -> Option<StanceLabel> {
        self.labels.get(id).copied()
    }

    pub fn groups(&self) -> &BTreeMap<String, Group> {
        &self.groups
    }

    pub fn group_of(&self, id: &str) -> Option<&Group> {
        self.group_of.get(id).and_then(|k| self.groups.get(k))
    }

    pub fn is_train_only(&self, id: &str) -> bool {
        self.train_only.contains(id)
    }

    pub fn train_only_ids(&self) -> &BTreeSet<String> {
        &self.train_only
    }

    /// Labeled group originals outside the training-only pool, sorted by id.
    /// These are the examples eligible for train/dev/test splitting.
    pub fn labeled_originals(&self) -> Vec<(&str, Stance)> {
        self.groups
            .values()
            .filter(|g| !self.train_only.contains(&g.original_id))
            .filter_map(|g| {
                self.labels
                    .get(&g.original_id)
                    .map(|l| (g.original_id.as_str(), l.class))
            })
            .collect::<BTreeMap<_, _>>()
            .into_iter()
            .collect()
    }

    /// Labeled tweets that may only ever be used for training, sorted by id.
    pub fn train_only_examples(&self) -> Vec<(&str, Stance)> {
        self.train_only
            .iter()
            .filter_map(|id| self.labels.get(id).map(|l| (id.as_str(), l.class)))
            .collect()
    }

    /// Returns a copy with the given labels set (overwriting existing ones).
    pub fn with_labels(&self, labels: impl IntoIterator<Item = (String, StanceLabel)>) -> Result<Self> {
        let mut next = self.clone();
        for (id, label) in labels {
            if !next.index.contains_key(&id) {
                return Err(Error::UnknownTweet(id));
            }
            next.labels.insert(id, label);
        }
        Ok(next)
    }

    /// Copies each labeled original's class onto unlabeled members of its group.
    pub fn propagate_labels(&self) -> Self {
        let mut next = self.clone();
        for g in self.groups.values() {
            let Some(orig) = self.labels.get(&g.original_id) else {
                continue;
            };
            for m in &g.member_ids {
                next.labels
                    .entry(m.clone())
                    .or_insert(StanceLabel::new(orig.class, crate::Provenance::Propagated));
            }
        }
        next
    }

    /// Appends auxiliary tweets labeled `class` as training-only examples.
    pub fn merge_auxiliary(&self, aux: &Corpus, class: Stance) -> Result<Self> {
        if aux.is_empty() {
            return Ok(self.clone());
        }
        let mut tweets = self.tweets.clone();
        let mut labels = self.labels.clone();
        let mut train_only = self.train_only.clone();
        for t in &aux.tweets {
            if self.index.contains_key(&t.id) {
                return Err(Error::IdCollision(t.id.clone()));
            }
            labels.insert(t.id.clone(), StanceLabel::manual(class));
            train_only.insert(t.id.clone());
            tweets.push(t.clone());
        }
        Self::build(tweets, labels, train_only)
    }
}

/// Partitions tweets by canonical key.
///
/// The original of a group is its earliest non-retweet member, ties broken by
/// the smallest id. Groups consisting only of retweets fall back to the earliest
/// retweet. Tweets whose text reduced to nothing, and training-only tweets, each
/// form a singleton group.
pub fn group_tweets(
    tweets: &[Tweet],
    processed: &[Preprocessed],
    train_only: &BTreeSet<String>,
) -> BTreeMap<String, Group> {
    let mut members: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, (t, p)) in tweets.iter().zip(processed).enumerate() {
        // Real keys never contain '<', so these cannot collide with them.
        let key = if train_only.contains(&t.id) {
            format!("<aux:{}>", t.id)
        } else if p.canonical_key.is_empty() {
            format!("<empty:{}>", t.id)
        } else {
            p.canonical_key.clone()
        };
        members.entry(key).or_default().push(i);
    }
    members
        .into_iter()
        .map(|(key, idx)| {
            let original = idx
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let rank = |i: usize| (processed[i].is_retweet, tweets[i].timestamp, &tweets[i].id);
                    rank(a).cmp(&rank(b))
                })
                .expect("groups are non-empty");
            let mut member_ids: Vec<String> = idx.iter().map(|&i| tweets[i].id.clone()).collect();
            member_ids.sort();
            let group = Group {
                key: key.clone(),
                original_id: tweets[original].id.clone(),
                member_ids,
            };
            (key, group)
        })
        .collect()
}
