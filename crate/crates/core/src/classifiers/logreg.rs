use crate::rng::{self, Rng};
use crate::{Error, ProbDist, Result, Stance};

use super::{epoch_order, TrainConfig};

/// Multinomial logistic (softmax) regression.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    dim: usize,
    /// Row-major `3 × dim`.
    pub weights: Vec<f64>,
    pub biases: [f64; 3],
}

impl LogRegModel {
    pub fn zeros(dim: usize) -> Self {
        LogRegModel {
            dim,
            weights: vec![0.0; 3 * dim],
            biases: [0.0; 3],
        }
    }

    pub fn from_parts(dim: usize, weights: Vec<f64>, biases: [f64; 3]) -> Result<Self> {
        if weights.len() != 3 * dim {
            return Err(Error::DimensionMismatch {
                expected: 3 * dim,
                got: weights.len(),
            });
        }
        Ok(LogRegModel { dim, weights, biases })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn logits(&self, x: &[f64]) -> [f64; 3] {
        debug_assert_eq!(x.len(), self.dim);
        std::array::from_fn(|c| {
            let row = &self.weights[c * self.dim..(c + 1) * self.dim];
            row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.biases[c]
        })
    }

    pub fn predict(&self, x: &[f64]) -> ProbDist {
        ProbDist::softmax(self.logits(x))
    }
}

/// Mini-batch gradient descent on mean cross-entropy plus `l2/2 · ‖W‖²`.
/// Weights start at zero; the seed drives the per-epoch shuffles.
pub fn train_logreg(data: &[(Vec<f64>, Stance)], cfg: &TrainConfig) -> Result<LogRegModel> {
    let Some((first, _)) = data.first() else {
        return Err(Error::EmptyTrainingSet);
    };
    let dim = first.len();
    if let Some((x, _)) = data.iter().find(|(x, _)| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }

    let mut model = LogRegModel::zeros(dim);
    let mut rng: Rng = rng::seeded(cfg.seed);
    let batch_size = cfg.batch_size.max(1);
    let mut grad_w = vec![0.0; 3 * dim];

    for epoch in 0..cfg.epochs {
        let order = epoch_order(data.len(), &mut rng);
        for (batch, idx) in order.chunks(batch_size).enumerate() {
            grad_w.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = [0.0; 3];
            let mut loss = 0.0;
            for &i in idx {
                let (x, y) = &data[i];
                let p = model.predict(x);
                loss -= p.prob(*y).ln();
                for c in 0..3 {
                    let delta = p.0[c] - if c == y.index() { 1.0 } else { 0.0 };
                    grad_b[c] += delta;
                    for (g, v) in grad_w[c * dim..(c + 1) * dim].iter_mut().zip(x) {
                        *g += delta * v;
                    }
                }
            }
            let m = idx.len() as f64;
            let penalty: f64 = model.weights.iter().map(|w| w * w).sum::<f64>() * cfg.l2 / 2.0;
            let loss = loss / m + penalty;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { loss, epoch, batch });
            }
            for (w, g) in model.weights.iter_mut().zip(&grad_w) {
                *w -= cfg.learning_rate * (g / m + cfg.l2 * *w);
            }
            for c in 0..3 {
                model.biases[c] -= cfg.learning_rate * grad_b[c] / m;
            }
        }
    }
    Ok(model)
}
