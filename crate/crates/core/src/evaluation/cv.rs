use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::curves::{auc, calibrate_threshold, pr_curve, CalibrationOutcome, PrCurve};
use super::{f1_report, make_folds, ConfusionMatrix, F1Report};
use crate::classifiers::{Doc, Featurizer, Model, ModelKind, Prediction, TrainConfig};
use crate::corpus::Corpus;
use crate::rng::{self, Rng};
use crate::{Error, Result, Stance};

pub trait Predictor {
    fn predict(&self, doc: &Doc, rng: &mut Rng) -> Prediction;
}

/// Something the protocol can train once per fold.
pub trait Learner {
    fn name(&self) -> String;
    fn fit<'s>(&'s self, train: &[(Doc, Stance)], seed: u64) -> Result<Box<dyn Predictor + 's>>;
}

pub struct ModelLearner<'a> {
    pub kind: ModelKind,
    pub cfg: TrainConfig,
    pub fx: Featurizer<'a>,
}

struct Fitted<'a> {
    model: Model,
    fx: Featurizer<'a>,
}

impl Predictor for Fitted<'_> {
    fn predict(&self, doc: &Doc, rng: &mut Rng) -> Prediction {
        self.model.predict(doc, &self.fx, rng)
    }
}

impl Learner for ModelLearner<'_> {
    fn name(&self) -> String {
        self.kind.to_string()
    }

    fn fit<'s>(&'s self, train: &[(Doc, Stance)], seed: u64) -> Result<Box<dyn Predictor + 's>> {
        let model = Model::train(self.kind, train, &self.fx, &self.cfg.with_seed(seed))?;
        Ok(Box::new(Fitted { model, fx: self.fx }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub fold: usize,
    pub id: String,
    pub gold: Stance,
    pub predicted: Stance,
    pub probs: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold_id: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub f1: F1Report,
    /// Per class; `None` when the model has no probabilities or the fold's
    /// test set has no example of the class.
    pub auc: [Option<f64>; 3],
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub f1: [f64; 3],
    pub macro_f1: f64,
    pub auc: [Option<f64>; 3],
    pub macro_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: String,
    pub seed: u64,
    pub target_precision: f64,
    pub folds: Vec<FoldReport>,
    pub mean: Summary,
    pub pooled_confusion: ConfusionMatrix,
    pub pooled_curves: Option<[PrCurve; 3]>,
    pub calibrations: Vec<CalibrationOutcome>,
    pub predictions: Vec<ScoredExample>,
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(fold as u64 + 1)
}

fn class_scores(examples: &[ScoredExample], class: Stance) -> Option<Vec<(f64, bool)>> {
    examples
        .iter()
        .map(|e| e.probs.map(|p| (p[class.index()], e.gold == class)))
        .collect()
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let got: Vec<f64> = values.flatten().collect();
    if got.is_empty() {
        None
    } else {
        Some(got.iter().sum::<f64>() / got.len() as f64)
    }
}

/// Runs the ten-fold protocol over the labeled originals of `corpus`.
/// Train-only tweets join every fold's training set and are never tested.
pub fn cross_validate(corpus: &Corpus, learner: &dyn Learner, seed: u64, target_precision: f64) -> Result<CvReport> {
    let eligible = corpus.labeled_originals();
    let gold: std::collections::HashMap<&str, Stance> = eligible.iter().copied().collect();
    let ids: Vec<String> = eligible.iter().map(|(id, _)| id.to_string()).collect();
    let doc = |id: &str| Doc::from_corpus(corpus, id).ok_or_else(|| Error::UnknownTweet(id.to_string()));
    let aux: Vec<(Doc, Stance)> = corpus
        .train_only_examples()
        .into_iter()
        .map(|(id, c)| Ok((doc(id)?, c)))
        .collect::<Result<_>>()?;

    let mut folds = Vec::new();
    let mut predictions = Vec::new();
    for split in make_folds(&ids, seed)? {
        let mut train = Vec::with_capacity(split.train_ids.len() + aux.len());
        for id in &split.train_ids {
            train.push((doc(id)?, gold[id.as_str()]));
        }
        train.extend(aux.iter().cloned());
        let predictor = learner.fit(&train, fold_seed(seed, split.fold_id))?;

        let mut rng = rng::stream(seed, 1000 + split.fold_id as u64);
        let mut fold_examples = Vec::with_capacity(split.test_ids.len());
        let mut confusion = ConfusionMatrix::default();
        for id in &split.test_ids {
            let p = predictor.predict(&doc(id)?, &mut rng);
            let g = gold[id.as_str()];
            confusion.add(g, p.class);
            fold_examples.push(ScoredExample {
                fold: split.fold_id,
                id: id.clone(),
                gold: g,
                predicted: p.class,
                probs: p.probs.map(|d| d.0),
            });
        }
        let auc = Stance::ALL.map(|c| {
            class_scores(&fold_examples, c)
                .and_then(|s| pr_curve(&s).ok())
                .and_then(|curve| auc(&curve).ok())
        });
        folds.push(FoldReport {
            fold_id: split.fold_id,
            train_size: train.len(),
            test_size: split.test_ids.len(),
            f1: f1_report(&confusion),
            auc,
            confusion,
        });
        predictions.extend(fold_examples);
    }

    let n = folds.len() as f64;
    let f1 = std::array::from_fn(|c| folds.iter().map(|f| f.f1.per_class[c].f1).sum::<f64>() / n);
    let macro_f1 = folds.iter().map(|f| f.f1.macro_f1).sum::<f64>() / n;
    let auc_mean: [Option<f64>; 3] = std::array::from_fn(|c| mean_of(folds.iter().map(|f| f.auc[c])));
    let macro_auc = mean_of(folds.iter().map(|f| {
        let [a, b, c] = f.auc;
        Some((a? + b? + c?) / 3.0)
    }));

    let mut pooled_confusion = ConfusionMatrix::default();
    for f in &folds {
        pooled_confusion.merge(&f.confusion);
    }

    let mut pooled_curves = None;
    let mut calibrations = Vec::new();
    if let Some(all) = Stance::ALL
        .iter()
        .map(|&c| class_scores(&predictions, c))
        .collect::<Option<Vec<_>>>()
    {
        let curves: Vec<PrCurve> = all.iter().map(|s| pr_curve(s)).collect::<Result<_>>()?;
        pooled_curves = Some(<[PrCurve; 3]>::try_from(curves).expect("three classes"));
        for c in Stance::POLARIZED {
            calibrations.push(calibrate_threshold(c, &all[c.index()], target_precision)?);
        }
    }

    Ok(CvReport {
        model: learner.name(),
        seed,
        target_precision,
        folds,
        mean: Summary {
            f1,
            macro_f1,
            auc: auc_mean,
            macro_auc,
        },
        pooled_confusion,
        pooled_curves,
        calibrations,
        predictions,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

impl CvReport {
    /// Human-readable report: one row per fold, then the averaged summary,
    /// pooled confusion matrix and calibrated thresholds.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model {}  seed {}", self.model, self.seed);
        let _ = writeln!(s);
        let _ = writeln!(s, "fold  train  test  f1_R    f1_U    f1_N    macroF1  macroAUC");
        for f in &self.folds {
            let [r, u, n] = f.f1.per_class.map(|c| c.f1);
            let macro_auc = match f.auc {
                [Some(a), Some(b), Some(c)] => Some((a + b + c) / 3.0),
                _ => None,
            };
            let _ = writeln!(
                s,
                "{:<4}  {:<5}  {:<4}  {r:.4}  {u:.4}  {n:.4}  {:.4}   {}",
                f.fold_id,
                f.train_size,
                f.test_size,
                f.f1.macro_f1,
                opt(macro_auc)
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "class          F1      AUC");
        for c in Stance::ALL {
            let _ = writeln!(
                s,
                "{:<13}  {:.4}  {}",
                c.as_str(),
                self.mean.f1[c.index()],
                opt(self.mean.auc[c.index()])
            );
        }
        let _ = writeln!(
            s,
            "{:<13}  {:.4}  {}",
            "macro",
            self.mean.macro_f1,
            opt(self.mean.macro_auc)
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "pooled confusion (rows true, cols predicted; R U N)");
        for (c, row) in Stance::ALL.iter().zip(self.pooled_confusion.counts) {
            let _ = writeln!(s, "{:<13}  {:>6} {:>6} {:>6}", c.as_str(), row[0], row[1], row[2]);
        }
        if !self.calibrations.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "calibration at precision >= {}", self.target_precision);
            for cal in &self.calibrations {
                match cal {
                    CalibrationOutcome::Calibrated(c) => {
                        let _ = writeln!(
                            s,
                            "{:<13}  threshold {:.6}  precision {:.4}  recall {:.4}",
                            c.class.as_str(),
                            c.threshold,
                            c.achieved_precision,
                            c.achieved_recall
                        );
                    }
                    CalibrationOutcome::Unachievable {
                        class, best_precision, ..
                    } => {
                        let _ = writeln!(
                            s,
                            "{:<13}  unachievable (best precision {best_precision:.4})",
                            class.as_str()
                        );
                    }
                }
            }
        }
        s
    }
}
