//! Stance classifiers: hashtag PMI baseline, softmax regression over averaged
//! embeddings, and a one-layer CNN over embedding sequences. Gradients are
//! written out by hand.

mod cnn;
mod logreg;
mod model;
mod pmi;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use cnn::{fit_cnn, mean_loss, train_cnn, CnnCache, CnnGradients, CnnModel, FILTER_WIDTH, NUM_FILTERS};
pub use logreg::{train_logreg, LogRegModel};
pub use model::{read_model, write_model, Featurizer, Model, ModelKind, Prediction};
pub use pmi::{compute_pmi, PmiTable};

use crate::rng::Rng;
use crate::{Error, Result, Stance};

/// A tweet as seen by a classifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Doc {
    pub id: String,
    pub tokens: Vec<String>,
    pub hashtags: BTreeSet<String>,
}

impl Doc {
    pub fn from_corpus(corpus: &crate::corpus::Corpus, id: &str) -> Option<Doc> {
        corpus.preprocessed(id).map(|p| Doc {
            id: id.to_string(),
            tokens: p.tokens.clone(),
            hashtags: p.hashtags.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub l2: f64,
}

impl TrainConfig {
    pub fn logreg() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            ..Default::default()
        }
    }

    pub fn cnn() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            ..Default::default()
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        TrainConfig { seed, ..self }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.05,
            epochs: 30,
            batch_size: 32,
            seed: 0,
            l2: 1e-4,
        }
    }
}

/// Uniformly random class.
pub fn random_predict(rng: &mut Rng) -> Stance {
    Stance::ALL[rng.gen_range(0..Stance::COUNT)]
}

/// Replicates examples of the listed classes until each matches the largest
/// one. Every original example is kept; extras are drawn with replacement.
pub fn upsample<T: Clone>(train: &[(T, Stance)], classes: &[Stance], rng: &mut Rng) -> Result<Vec<(T, Stance)>> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); Stance::COUNT];
    for (i, (_, c)) in train.iter().enumerate() {
        by_class[c.index()].push(i);
    }
    if let Some(&empty) = classes.iter().find(|c| by_class[c.index()].is_empty()) {
        return Err(Error::EmptyClass(empty));
    }
    let target = classes.iter().map(|c| by_class[c.index()].len()).max().unwrap_or(0);

    let mut out = train.to_vec();
    for &c in classes {
        let pool = &by_class[c.index()];
        for _ in pool.len()..target {
            let &i = pool.choose(rng).expect("non-empty pool");
            out.push(train[i].clone());
        }
    }
    Ok(out)
}

/// Fixed-order mini-batch schedule shared by the trainers.
pub(crate) fn epoch_order(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}
