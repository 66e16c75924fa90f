//! One-layer convolutional text classifier.
//!
//! Filters of width 4 slide over the token-vector sequence, followed by a
//! relu, max-pooling over positions and a softmax readout. When a tweet has at
//! least `width` tokens only windows lying entirely inside the real tokens are
//! pooled, so trailing padding never changes the output. Shorter tweets use a
//! single window at position 0, zero-padded to the filter width.

use rand::Rng as _;

use crate::embeddings::TweetMatrix;
use crate::rng::{self, Rng};
use crate::{Error, ProbDist, Result, Stance};

use super::{epoch_order, TrainConfig};

pub const NUM_FILTERS: usize = 100;
pub const FILTER_WIDTH: usize = 4;

const INIT_RANGE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    num_filters: usize,
    width: usize,
    dim: usize,
    /// `[filter][row][dim]`, row-major.
    pub filters: Vec<f64>,
    pub filter_biases: Vec<f64>,
    /// `[class][filter]`, row-major.
    pub output_weights: Vec<f64>,
    pub output_biases: [f64; 3],
}

/// Forward-pass values needed for backpropagation.
#[derive(Debug, Clone)]
pub struct CnnCache {
    /// Input rows covering every pooled window, zero-padded.
    input: Vec<f64>,
    positions: usize,
    /// Pre-activations, `[position][filter]`.
    pre: Vec<f64>,
    /// Position of the maximum pre-activation for each filter.
    argmax: Vec<usize>,
    pooled: Vec<f64>,
    probs: ProbDist,
}

impl CnnCache {
    pub fn probs(&self) -> ProbDist {
        self.probs
    }

    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    /// Post-relu activations, `[position][filter]`.
    pub fn activations(&self) -> Vec<f64> {
        self.pre.iter().map(|z| z.max(0.0)).collect()
    }

    pub fn argmax(&self) -> &[usize] {
        &self.argmax
    }
}

/// Gradient with the same layout as [`CnnModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct CnnGradients {
    pub filters: Vec<f64>,
    pub filter_biases: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_biases: [f64; 3],
    /// Cross-entropy of the target under the cached prediction.
    pub loss: f64,
}

impl CnnGradients {
    fn zeros_like(m: &CnnModel) -> Self {
        CnnGradients {
            filters: vec![0.0; m.filters.len()],
            filter_biases: vec![0.0; m.num_filters],
            output_weights: vec![0.0; m.output_weights.len()],
            output_biases: [0.0; 3],
            loss: 0.0,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl CnnModel {
    /// All-zero model with the standard 100 filters of width 4.
    pub fn zeros(dim: usize) -> Self {
        Self::zeros_with_shape(NUM_FILTERS, FILTER_WIDTH, dim)
    }

    pub fn zeros_with_shape(num_filters: usize, width: usize, dim: usize) -> Self {
        assert!(num_filters > 0 && width > 0 && dim > 0, "empty CNN shape");
        CnnModel {
            num_filters,
            width,
            dim,
            filters: vec![0.0; num_filters * width * dim],
            filter_biases: vec![0.0; num_filters],
            output_weights: vec![0.0; 3 * num_filters],
            output_biases: [0.0; 3],
        }
    }

    /// Weights uniform in `[-0.05, 0.05]`, biases zero.
    pub fn init(num_filters: usize, width: usize, dim: usize, rng: &mut Rng) -> Self {
        let mut m = Self::zeros_with_shape(num_filters, width, dim);
        for w in m.filters.iter_mut().chain(m.output_weights.iter_mut()) {
            *w = rng.gen_range(-INIT_RANGE..=INIT_RANGE);
        }
        m
    }

    pub fn num_filters(&self) -> usize {
        self.num_filters
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of pooled window positions for a tweet of `true_len` tokens.
    pub fn positions_for(&self, true_len: usize) -> usize {
        true_len.max(self.width) - self.width + 1
    }

    pub fn forward(&self, m: &TweetMatrix) -> (ProbDist, CnnCache) {
        assert_eq!(m.dim(), self.dim, "input dimension does not match the model");
        let positions = self.positions_for(m.true_len());
        let rows = positions + self.width - 1;
        let mut input = vec![0.0; rows * self.dim];
        for (r, dst) in input.chunks_exact_mut(self.dim).enumerate().take(m.true_len()) {
            dst.copy_from_slice(m.row(r).expect("row within true_len"));
        }

        let span = self.width * self.dim;
        let mut pre = vec![0.0; positions * self.num_filters];
        for p in 0..positions {
            let window = &input[p * self.dim..p * self.dim + span];
            for f in 0..self.num_filters {
                let filter = &self.filters[f * span..(f + 1) * span];
                pre[p * self.num_filters + f] = dot(filter, window) + self.filter_biases[f];
            }
        }

        let mut argmax = vec![0; self.num_filters];
        let mut pooled = vec![0.0; self.num_filters];
        for f in 0..self.num_filters {
            let mut best = 0;
            for p in 1..positions {
                if pre[p * self.num_filters + f] > pre[best * self.num_filters + f] {
                    best = p;
                }
            }
            argmax[f] = best;
            pooled[f] = pre[best * self.num_filters + f].max(0.0);
        }

        let logits = std::array::from_fn(|c| {
            dot(
                &self.output_weights[c * self.num_filters..(c + 1) * self.num_filters],
                &pooled,
            ) + self.output_biases[c]
        });
        let probs = ProbDist::softmax(logits);
        let cache = CnnCache {
            input,
            positions,
            pre,
            argmax,
            pooled,
            probs,
        };
        (probs, cache)
    }

    pub fn predict(&self, m: &TweetMatrix) -> ProbDist {
        self.forward(m).0
    }

    /// Exact cross-entropy gradients for the cached forward pass.
    pub fn gradients(&self, cache: &CnnCache, target: Stance) -> CnnGradients {
        let mut g = CnnGradients::zeros_like(self);
        self.accumulate_gradients(cache, target, &mut g);
        g
    }

    fn accumulate_gradients(&self, cache: &CnnCache, target: Stance, g: &mut CnnGradients) {
        let nf = self.num_filters;
        let span = self.width * self.dim;
        let dlogits: [f64; 3] = std::array::from_fn(|c| cache.probs.0[c] - if c == target.index() { 1.0 } else { 0.0 });
        g.loss += -cache.probs.prob(target).ln();

        for c in 0..3 {
            g.output_biases[c] += dlogits[c];
            for (gw, v) in g.output_weights[c * nf..(c + 1) * nf].iter_mut().zip(&cache.pooled) {
                *gw += dlogits[c] * v;
            }
        }
        for f in 0..nf {
            let p = cache.argmax[f];
            if cache.pre[p * nf + f] <= 0.0 {
                continue;
            }
            let dz: f64 = (0..3).map(|c| dlogits[c] * self.output_weights[c * nf + f]).sum();
            g.filter_biases[f] += dz;
            let window = &cache.input[p * self.dim..p * self.dim + span];
            for (gw, x) in g.filters[f * span..(f + 1) * span].iter_mut().zip(window) {
                *gw += dz * x;
            }
        }
    }

    fn apply(&mut self, g: &CnnGradients, scale: f64, lr: f64, l2: f64) {
        for (w, d) in self.filters.iter_mut().zip(&g.filters) {
            *w -= lr * (d * scale + l2 * *w);
        }
        for (w, d) in self.output_weights.iter_mut().zip(&g.output_weights) {
            *w -= lr * (d * scale + l2 * *w);
        }
        for (b, d) in self.filter_biases.iter_mut().zip(&g.filter_biases) {
            *b -= lr * d * scale;
        }
        for (b, d) in self.output_biases.iter_mut().zip(&g.output_biases) {
            *b -= lr * d * scale;
        }
    }

    fn weight_norm_sq(&self) -> f64 {
        self.filters.iter().chain(&self.output_weights).map(|w| w * w).sum()
    }

    /// Every parameter in a fixed order: filters, filter biases, output
    /// weights, output biases.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.filters
            .iter_mut()
            .chain(self.filter_biases.iter_mut())
            .chain(self.output_weights.iter_mut())
            .chain(self.output_biases.iter_mut())
    }
}

impl CnnGradients {
    /// Same order as [`CnnModel::params_mut`].
    pub fn flatten(&self) -> Vec<f64> {
        self.filters
            .iter()
            .chain(&self.filter_biases)
            .chain(&self.output_weights)
            .chain(&self.output_biases)
            .copied()
            .collect()
    }
}

/// Trains the standard 100-filter model.
pub fn train_cnn(data: &[(TweetMatrix, Stance)], cfg: &TrainConfig) -> Result<CnnModel> {
    let Some((first, _)) = data.first() else {
        return Err(Error::EmptyTrainingSet);
    };
    let mut rng = rng::seeded(cfg.seed);
    let model = CnnModel::init(NUM_FILTERS, FILTER_WIDTH, first.dim(), &mut rng);
    fit_cnn(model, data, cfg, &mut rng)
}

/// Mini-batch gradient descent from `model` on mean cross-entropy plus
/// `l2/2 · ‖weights‖²`. Per-example gradients are summed in batch order.
pub fn fit_cnn(
    mut model: CnnModel,
    data: &[(TweetMatrix, Stance)],
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<CnnModel> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if let Some((m, _)) = data.iter().find(|(m, _)| m.dim() != model.dim) {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: m.dim(),
        });
    }
    let batch_size = cfg.batch_size.max(1);
    let mut grad = CnnGradients::zeros_like(&model);
    for epoch in 0..cfg.epochs {
        let order = epoch_order(data.len(), rng);
        for (batch, idx) in order.chunks(batch_size).enumerate() {
            grad.filters.iter_mut().for_each(|v| *v = 0.0);
            grad.filter_biases.iter_mut().for_each(|v| *v = 0.0);
            grad.output_weights.iter_mut().for_each(|v| *v = 0.0);
            grad.output_biases = [0.0; 3];
            grad.loss = 0.0;
            for &i in idx {
                let (m, y) = &data[i];
                let (_, cache) = model.forward(m);
                model.accumulate_gradients(&cache, *y, &mut grad);
            }
            let scale = 1.0 / idx.len() as f64;
            let loss = grad.loss * scale + cfg.l2 / 2.0 * model.weight_norm_sq();
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { loss, epoch, batch });
            }
            model.apply(&grad, scale, cfg.learning_rate, cfg.l2);
        }
    }
    Ok(model)
}

/// Mean cross-entropy of `model` on `data`.
pub fn mean_loss(model: &CnnModel, data: &[(TweetMatrix, Stance)]) -> f64 {
    let total: f64 = data.iter().map(|(m, y)| -model.predict(m).prob(*y).ln()).sum();
    total / data.len() as f64
}
