//! Mean-pooled embedding classifier: `f(tokens) = σ(w · mean_i e(token_i) + b)`.
//! Tokens missing from the table contribute a zero vector to the mean.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_data, log_loss, sigmoid, Classifier, Input, RepresentationKind, TrainLog};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::text::Document;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingClassifier {
    pub table: EmbeddingTable,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl EmbeddingClassifier {
    pub fn new(table: EmbeddingTable, weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.len() != table.dim() {
            return Err(Error::DimensionMismatch {
                expected: table.dim(),
                actual: weights.len(),
            });
        }
        Ok(Self { table, weights, bias })
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    /// Row-major `n_tokens × dim` matrix of the tokens' embeddings.
    pub fn embed(&self, tokens: &[String]) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0; tokens.len() * dim];
        for (p, t) in tokens.iter().enumerate() {
            if let Some(v) = self.table.vector(t) {
                out[p * dim..(p + 1) * dim].copy_from_slice(v);
            }
        }
        out
    }

    /// Pre-sigmoid output for an already-embedded sequence.
    pub fn logit_from_matrix(&self, matrix: &[f64]) -> f64 {
        let dim = self.dim();
        let n = matrix.len() / dim;
        if n == 0 {
            return self.bias;
        }
        let mut pooled = vec![0.0; dim];
        for row in matrix.chunks_exact(dim) {
            for (p, v) in pooled.iter_mut().zip(row) {
                *p += v;
            }
        }
        let inv = 1.0 / n as f64;
        pooled.iter().zip(&self.weights).map(|(p, w)| p * inv * w).sum::<f64>() + self.bias
    }

    /// Gradient of the logit with respect to each row of an embedded sequence.
    /// Mean pooling makes every row `w / n` whatever the matrix values are.
    pub fn gradient_from_matrix(&self, matrix: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let n = matrix.len() / dim;
        let inv = 1.0 / n as f64;
        let row: Vec<f64> = self.weights.iter().map(|w| w * inv).collect();
        row.iter().copied().cycle().take(n * dim).collect()
    }

    pub fn logit(&self, tokens: &[String]) -> f64 {
        self.logit_from_matrix(&self.embed(tokens))
    }

    pub fn proba(&self, tokens: &[String]) -> f64 {
        sigmoid(self.logit(tokens))
    }

    /// Per-token gradient rows (`n_tokens × dim`) of the logit.
    pub fn gradient_wrt_embeddings(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>> {
        if tokens.is_empty() {
            return Err(Error::InvalidInput("token sequence is empty".into()));
        }
        let g = self.gradient_from_matrix(&self.embed(tokens));
        Ok(g.chunks_exact(self.dim()).map(<[f64]>::to_vec).collect())
    }

    /// Mean log-loss over `docs` and its gradient with respect to the head.
    pub fn loss_and_head_gradient(&self, docs: &[Document]) -> (f64, Vec<f64>, f64) {
        let dim = self.dim();
        let mut loss = 0.0;
        let mut gw = vec![0.0; dim];
        let mut gb = 0.0;
        for d in docs {
            let pooled = self.pooled(&d.tokens);
            let z = pooled.iter().zip(&self.weights).map(|(p, w)| p * w).sum::<f64>() + self.bias;
            loss += log_loss(z, d.label);
            let r = sigmoid(z) - d.label as f64;
            for (g, p) in gw.iter_mut().zip(&pooled) {
                *g += r * p;
            }
            gb += r;
        }
        let inv = 1.0 / docs.len() as f64;
        gw.iter_mut().for_each(|g| *g *= inv);
        (loss * inv, gw, gb * inv)
    }

    fn pooled(&self, tokens: &[String]) -> Vec<f64> {
        let dim = self.dim();
        let mut pooled = vec![0.0; dim];
        for t in tokens {
            if let Some(v) = self.table.vector(t) {
                for (p, x) in pooled.iter_mut().zip(v) {
                    *p += x;
                }
            }
        }
        let inv = 1.0 / tokens.len().max(1) as f64;
        pooled.iter_mut().for_each(|p| *p *= inv);
        pooled
    }
}

impl Classifier for EmbeddingClassifier {
    fn representation(&self) -> RepresentationKind {
        RepresentationKind::TokenSequence
    }

    fn predict_proba(&self, input: Input<'_>) -> Result<f64> {
        match input {
            Input::Tokens(t) => Ok(self.proba(t)),
            other => Err(Error::RepresentationMismatch {
                expected: RepresentationKind::TokenSequence.as_str(),
                actual: other.kind().as_str(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingClassifierConfig {
    pub freeze_embeddings: bool,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for EmbeddingClassifierConfig {
    fn default() -> Self {
        Self {
            freeze_embeddings: true,
            lr: 2.0,
            epochs: 40,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// Gradient descent on mean log-loss, training the head and optionally the
/// embedding rows of a private copy of `table`.
pub fn train_embedding_classifier(
    corpus: &[Document],
    table: &EmbeddingTable,
    cfg: &EmbeddingClassifierConfig,
) -> Result<(EmbeddingClassifier, TrainLog)> {
    let labels: Vec<u8> = corpus.iter().map(|d| d.label).collect();
    check_training_data(corpus.len(), &labels)?;
    if cfg.lr <= 0.0 || cfg.batch_size == 0 {
        return Err(Error::InvalidInput("lr must be > 0 and batch_size > 0".into()));
    }
    let mut log = TrainLog::default();
    let missing = corpus
        .iter()
        .flat_map(|d| &d.tokens)
        .filter(|t| table.index_of(t).is_none())
        .count();
    if missing > 0 {
        let msg = format!("{missing} corpus token occurrences missing from the embedding table; mapped to zero vectors");
        log::warn!("{msg}");
        log.warnings.push(msg);
    }
    let dim = table.dim();
    let mut model = EmbeddingClassifier::new(table.clone(), vec![0.0; dim], 0.0)?;
    let ids: Vec<Vec<Option<usize>>> = corpus
        .iter()
        .map(|d| d.tokens.iter().map(|t| table.index_of(t)).collect())
        .collect();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            let mut gw = vec![0.0; dim];
            let mut gb = 0.0;
            let mut row_grads: Vec<(usize, f64)> = Vec::new();
            for &i in batch {
                let pooled = model.pooled(&corpus[i].tokens);
                let z = pooled.iter().zip(&model.weights).map(|(p, w)| p * w).sum::<f64>() + model.bias;
                let r = sigmoid(z) - labels[i] as f64;
                for (g, p) in gw.iter_mut().zip(&pooled) {
                    *g += r * p;
                }
                gb += r;
                if !cfg.freeze_embeddings {
                    let per_token = r / ids[i].len() as f64;
                    row_grads.extend(ids[i].iter().flatten().map(|&t| (t, per_token)));
                }
            }
            if !cfg.freeze_embeddings {
                let w = model.weights.clone();
                for (t, coef) in row_grads {
                    for (e, wd) in model.table.row_mut(t).iter_mut().zip(&w) {
                        *e -= cfg.lr * coef * wd * scale;
                    }
                }
            }
            for (w, g) in model.weights.iter_mut().zip(&gw) {
                *w -= cfg.lr * g * scale;
            }
            model.bias -= cfg.lr * gb * scale;
        }
        let (loss, _, _) = model.loss_and_head_gradient(corpus);
        log.push_epoch(epoch, loss)?;
    }
    Ok((model, log))
}
