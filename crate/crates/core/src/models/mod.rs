//! Classifiers spanning the interpretability spectrum: a linear model, a
//! main-effects additive model, a random forest, a differentiable
//! embedding-pooling classifier, and an adapter for external black boxes.

mod additive;
mod embedding;
pub mod external;
mod forest;
mod linear;

use serde::{Deserialize, Serialize};

pub use additive::{train_additive, AdditiveConfig, AdditiveModel, ShapeFunction};
pub use embedding::{train_embedding_classifier, EmbeddingClassifier, EmbeddingClassifierConfig};
pub use external::{ExternalModel, ExternalModelHandle};
pub use forest::{train_forest, ForestConfig, ForestModel, Tree, TreeNode};
pub use linear::{train_logistic, LinearModel, LogisticConfig};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

/// Probabilities are clamped to this distance from 0 and 1 before taking a logit.
pub const PROB_CLAMP: f64 = 1e-6;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    (p / (1.0 - p)).ln()
}

/// The scalar an attribution explains and a metric evaluates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    Logit,
    Probability,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Logit => "logit",
            Target::Probability => "probability",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationKind {
    SparseVector,
    TokenSequence,
}

impl RepresentationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RepresentationKind::SparseVector => "sparse-vector",
            RepresentationKind::TokenSequence => "token-sequence",
        }
    }
}

/// A model input in one of the two supported representations.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Sparse(&'a SparseVector),
    Tokens(&'a [String]),
}

impl Input<'_> {
    pub fn kind(&self) -> RepresentationKind {
        match self {
            Input::Sparse(_) => RepresentationKind::SparseVector,
            Input::Tokens(_) => RepresentationKind::TokenSequence,
        }
    }
}

/// Any binary classifier exposing a probability.
pub trait Classifier: Send + Sync {
    fn representation(&self) -> RepresentationKind;

    fn predict_proba(&self, input: Input<'_>) -> Result<f64>;
}

/// A classifier over fixed-dimensional sparse vectors (TF-IDF models).
pub trait VectorModel: Send + Sync {
    fn dim(&self) -> usize;

    fn logit(&self, x: &SparseVector) -> Result<f64>;

    fn proba(&self, x: &SparseVector) -> Result<f64> {
        self.logit(x).map(sigmoid)
    }

    fn eval(&self, x: &SparseVector, target: Target) -> Result<f64> {
        match target {
            Target::Logit => self.logit(x),
            Target::Probability => self.proba(x),
        }
    }

    fn eval_batch(&self, xs: &[SparseVector], target: Target) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.eval(x, target)).collect()
    }
}

pub(crate) fn check_dim(model_dim: usize, x: &SparseVector) -> Result<()> {
    if x.dim() != model_dim {
        return Err(Error::DimensionMismatch {
            expected: model_dim,
            actual: x.dim(),
        });
    }
    Ok(())
}

pub(crate) fn vector_classify<M: VectorModel + ?Sized>(model: &M, input: Input<'_>) -> Result<f64> {
    match input {
        Input::Sparse(x) => model.proba(x),
        other => Err(Error::RepresentationMismatch {
            expected: RepresentationKind::SparseVector.as_str(),
            actual: other.kind().as_str(),
        }),
    }
}

/// Per-epoch training losses and any warnings raised while fitting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub losses: Vec<f64>,
    pub warnings: Vec<String>,
}

impl TrainLog {
    /// Records an epoch loss; non-finite losses abort training.
    pub(crate) fn push_epoch(&mut self, epoch: usize, loss: f64) -> Result<()> {
        if !loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        self.losses.push(loss);
        let n = self.losses.len();
        if n > 5 && self.losses[n - 1] > self.losses[n - 6] {
            let msg = format!(
                "loss increased over a 5-epoch window at epoch {epoch}: {} -> {}",
                self.losses[n - 6],
                self.losses[n - 1]
            );
            log::warn!("{msg}");
            self.warnings.push(msg);
        }
        Ok(())
    }
}

pub(crate) fn check_training_data(n_x: usize, y: &[u8]) -> Result<()> {
    if n_x != y.len() {
        return Err(Error::InvalidInput(format!("{n_x} examples but {} labels", y.len())));
    }
    if n_x < 2 {
        return Err(Error::InvalidInput("need at least 2 training examples".into()));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(Error::InvalidInput("labels must be 0 or 1".into()));
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Binary log-loss of a logit, computed stably.
pub(crate) fn log_loss(z: f64, y: u8) -> f64 {
    // log(1 + e^{-z}) for y=1, log(1 + e^{z}) for y=0
    let s = if y == 1 { -z } else { z };
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

/// Serializable union of the built-in models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuiltinModel {
    Linear(LinearModel),
    Additive(AdditiveModel),
    Forest(ForestModel),
    Embedding(EmbeddingClassifier),
}

impl BuiltinModel {
    pub fn as_vector_model(&self) -> Option<&dyn VectorModel> {
        match self {
            BuiltinModel::Linear(m) => Some(m),
            BuiltinModel::Additive(m) => Some(m),
            BuiltinModel::Forest(m) => Some(m),
            BuiltinModel::Embedding(_) => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            BuiltinModel::Linear(_) => "linear",
            BuiltinModel::Additive(_) => "additive",
            BuiltinModel::Forest(_) => "forest",
            BuiltinModel::Embedding(_) => "embedding",
        }
    }
}

impl Classifier for BuiltinModel {
    fn representation(&self) -> RepresentationKind {
        match self {
            BuiltinModel::Embedding(_) => RepresentationKind::TokenSequence,
            _ => RepresentationKind::SparseVector,
        }
    }

    fn predict_proba(&self, input: Input<'_>) -> Result<f64> {
        match self {
            BuiltinModel::Linear(m) => m.predict_proba(input),
            BuiltinModel::Additive(m) => m.predict_proba(input),
            BuiltinModel::Forest(m) => m.predict_proba(input),
            BuiltinModel::Embedding(m) => m.predict_proba(input),
        }
    }
}

/// Predicts with any classifier, checking the representation kind first.
pub fn predict_proba(model: &dyn Classifier, input: Input<'_>) -> Result<f64> {
    if model.representation() != input.kind() {
        return Err(Error::RepresentationMismatch {
            expected: model.representation().as_str(),
            actual: input.kind().as_str(),
        });
    }
    model.predict_proba(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_loss_is_stable() {
        assert!((log_loss(0.0, 1) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(log_loss(800.0, 1) < 1e-300);
        assert!((log_loss(800.0, 0) - 800.0).abs() < 1e-9);
        assert!((sigmoid(3f64.ln()) - 0.75).abs() < 1e-15);
        assert_eq!(sigmoid(-1000.0), 0.0);
    }

    #[test]
    fn logit_clamps() {
        assert!(logit(0.0).is_finite());
        assert!(logit(1.0).is_finite());
        assert!((logit(0.75) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn predict_rejects_mismatched_representation() {
        let m = BuiltinModel::Linear(LinearModel::zeros(3));
        let toks = vec!["a".to_string()];
        assert!(matches!(
            predict_proba(&m, Input::Tokens(&toks)),
            Err(Error::RepresentationMismatch { .. })
        ));
        let x = SparseVector::from_dense(&[1.0, 0.0, 2.0]);
        assert_eq!(predict_proba(&m, Input::Sparse(&x)).unwrap(), 0.5);
    }
}
