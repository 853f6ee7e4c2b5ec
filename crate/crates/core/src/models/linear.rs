use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, check_training_data, log_loss, sigmoid, vector_classify, Classifier, Input, RepresentationKind, TrainLog, VectorModel};
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("linear model parameters must be finite".into()));
        }
        Ok(Self { weights, bias })
    }
}

impl VectorModel for LinearModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn logit(&self, x: &SparseVector) -> Result<f64> {
        check_dim(self.weights.len(), x)?;
        Ok(x.dot_dense(&self.weights) + self.bias)
    }
}

impl Classifier for LinearModel {
    fn representation(&self) -> RepresentationKind {
        RepresentationKind::SparseVector
    }

    fn predict_proba(&self, input: Input<'_>) -> Result<f64> {
        vector_classify(self, input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    pub l2: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            lr: 1.0,
            epochs: 20,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// Mini-batch gradient descent on ℓ2-regularized mean log-loss, with
/// per-epoch shuffles drawn from `seed`.
pub fn train_logistic(x: &[SparseVector], y: &[u8], cfg: &LogisticConfig) -> Result<(LinearModel, TrainLog)> {
    check_training_data(x.len(), y)?;
    if cfg.l2 < 0.0 || cfg.lr <= 0.0 || cfg.batch_size == 0 {
        return Err(Error::InvalidInput("l2 must be >= 0, lr > 0, batch_size > 0".into()));
    }
    let dim = x[0].dim();
    for v in x {
        check_dim(dim, v)?;
    }
    let mut model = LinearModel::zeros(dim);
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut grad = vec![0.0; dim];
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = 0.0;
            for &i in batch {
                let r = sigmoid(x[i].dot_dense(&model.weights) + model.bias) - y[i] as f64;
                for (j, v) in x[i].iter() {
                    grad[j] += r * v;
                }
                grad_b += r;
            }
            let scale = 1.0 / batch.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&grad) {
                *w -= cfg.lr * (g * scale + cfg.l2 * *w);
            }
            model.bias -= cfg.lr * grad_b * scale;
        }
        log.push_epoch(epoch, objective(&model, x, y, cfg.l2))?;
    }
    Ok((model, log))
}

fn objective(model: &LinearModel, x: &[SparseVector], y: &[u8], l2: f64) -> f64 {
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(v, &l)| log_loss(v.dot_dense(&model.weights) + model.bias, l))
        .sum::<f64>()
        / x.len() as f64;
    data + 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>()
}
