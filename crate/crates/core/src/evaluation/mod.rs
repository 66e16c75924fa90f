//! Evaluation protocol: random 60/20/20 splits, confusion matrices, F1,
//! one-vs-all precision-recall curves with trapezoidal AUC, and
//! precision-targeted threshold calibration.

mod curves;
mod cv;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use curves::{auc, calibrate_threshold, pr_curve, Calibration, CalibrationOutcome, PrCurve, PrPoint};
pub use cv::{cross_validate, CvReport, FoldReport, Learner, ModelLearner, Predictor, ScoredExample, Summary};

use crate::rng;
use crate::{Error, Result, Stance};

pub const NUM_FOLDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub fold_id: usize,
    pub train_ids: Vec<String>,
    pub dev_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

/// Ten independent shuffles of `ids`, each cut into 20% test, 20% dev and the
/// rest for training. Input order does not matter.
pub fn make_folds(ids: &[String], seed: u64) -> Result<Vec<FoldSplit>> {
    if ids.len() < NUM_FOLDS {
        return Err(Error::TooFewIds {
            need: NUM_FOLDS,
            got: ids.len(),
        });
    }
    let mut sorted = ids.to_vec();
    sorted.sort();
    let n = sorted.len();
    let n_test = n / 5;
    let n_dev = n / 5;
    Ok((0..NUM_FOLDS)
        .map(|fold_id| {
            let mut order = sorted.clone();
            order.shuffle(&mut rng::stream(seed, fold_id as u64));
            let test_ids = order[..n_test].to_vec();
            let dev_ids = order[n_test..n_test + n_dev].to_vec();
            let train_ids = order[n_test + n_dev..].to_vec();
            FoldSplit {
                fold_id,
                train_ids,
                dev_ids,
                test_ids,
            }
        })
        .collect())
}

/// Rows are the true class, columns the prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn add(&mut self, gold: Stance, pred: Stance) {
        self.counts[gold.index()][pred.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for g in 0..3 {
            for p in 0..3 {
                self.counts[g][p] += other.counts[g][p];
            }
        }
    }
}

pub fn confusion(golds: &[Stance], preds: &[Stance]) -> Result<ConfusionMatrix> {
    if golds.len() != preds.len() {
        return Err(Error::LengthMismatch(golds.len(), preds.len()));
    }
    let mut cm = ConfusionMatrix::default();
    for (&g, &p) in golds.iter().zip(preds) {
        cm.add(g, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    /// Indexed by [`Stance::index`].
    pub per_class: [ClassScores; 3],
    pub macro_f1: f64,
}

/// Harmonic mean; zero when both inputs are zero.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_report(cm: &ConfusionMatrix) -> F1Report {
    let per_class = std::array::from_fn(|c| {
        let tp = cm.counts[c][c];
        let predicted: u64 = (0..3).map(|g| cm.counts[g][c]).sum();
        let actual: u64 = cm.counts[c].iter().sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, actual);
        ClassScores {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    });
    let macro_f1 = per_class.iter().map(|s: &ClassScores| s.f1).sum::<f64>() / 3.0;
    F1Report { per_class, macro_f1 }
}
