//! Main-effects additive model: per-feature piecewise-constant shape
//! functions fitted by cyclic gradient boosting over fixed quantile bins.
//! Each shape is anchored so that `shape_j(0) = 0`; the offset lives in the
//! intercept, which keeps attributions for absent features at zero.

use serde::{Deserialize, Serialize};

use super::{check_dim, check_training_data, logit, sigmoid, vector_classify, Classifier, Input, RepresentationKind, TrainLog, VectorModel};
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFunction {
    /// Strictly increasing cut points; bin `b` covers `(edges[b-1], edges[b]]`.
    pub edges: Vec<f64>,
    /// One score per bin, `edges.len() + 1` entries.
    pub scores: Vec<f64>,
}

impl ShapeFunction {
    pub fn bin(&self, x: f64) -> usize {
        self.edges.partition_point(|&e| e < x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scores[self.bin(x)]
    }

    pub fn total_variation(&self) -> f64 {
        self.scores.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct RawAdditive {
    shapes: Vec<ShapeFunction>,
    intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAdditive", into = "RawAdditive")]
pub struct AdditiveModel {
    shapes: Vec<ShapeFunction>,
    intercept: f64,
    /// Σ_j shape_j(0), cached for sparse evaluation.
    zero_sum: f64,
}

impl TryFrom<RawAdditive> for AdditiveModel {
    type Error = Error;

    fn try_from(raw: RawAdditive) -> Result<Self> {
        AdditiveModel::new(raw.shapes, raw.intercept)
    }
}

impl From<AdditiveModel> for RawAdditive {
    fn from(m: AdditiveModel) -> Self {
        RawAdditive {
            shapes: m.shapes,
            intercept: m.intercept,
        }
    }
}

impl AdditiveModel {
    pub fn new(shapes: Vec<ShapeFunction>, intercept: f64) -> Result<Self> {
        for (j, s) in shapes.iter().enumerate() {
            if s.scores.len() != s.edges.len() + 1 {
                return Err(Error::InvalidInput(format!("feature {j}: scores must have edges.len()+1 entries")));
            }
            if s.edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!("feature {j}: bin edges not strictly increasing")));
            }
            if s.scores.iter().chain(&s.edges).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("feature {j}: non-finite parameter")));
            }
        }
        let zero_sum = shapes.iter().map(|s| s.eval(0.0)).sum();
        Ok(Self {
            shapes,
            intercept,
            zero_sum,
        })
    }

    /// A model with flat zero shapes.
    pub fn constant(dim: usize, intercept: f64) -> Self {
        let shapes = vec![
            ShapeFunction {
                edges: Vec::new(),
                scores: vec![0.0],
            };
            dim
        ];
        Self::new(shapes, intercept).expect("flat shapes are valid")
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn shapes(&self) -> &[ShapeFunction] {
        &self.shapes
    }

    pub fn shape_value(&self, feature: usize, x: f64) -> f64 {
        self.shapes[feature].eval(x)
    }
}

impl VectorModel for AdditiveModel {
    fn dim(&self) -> usize {
        self.shapes.len()
    }

    fn logit(&self, x: &SparseVector) -> Result<f64> {
        check_dim(self.shapes.len(), x)?;
        let adjust: f64 = x
            .iter()
            .map(|(j, v)| self.shapes[j].eval(v) - self.shapes[j].eval(0.0))
            .sum();
        Ok(self.intercept + self.zero_sum + adjust)
    }
}

impl Classifier for AdditiveModel {
    fn representation(&self) -> RepresentationKind {
        RepresentationKind::SparseVector
    }

    fn predict_proba(&self, input: Input<'_>) -> Result<f64> {
        vector_classify(self, input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdditiveConfig {
    pub n_bins: usize,
    pub rounds: usize,
    pub lr: f64,
}

impl Default for AdditiveConfig {
    fn default() -> Self {
        Self {
            n_bins: 256,
            rounds: 500,
            lr: 0.1,
        }
    }
}

/// Quantile cut points over a feature's training values (zeros included).
fn quantile_edges(mut values: Vec<f64>, n_bins: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut unique = values.clone();
    unique.dedup();
    if unique.len() <= 1 {
        return Vec::new();
    }
    if unique.len() <= n_bins {
        return unique.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    let n = values.len();
    let mut edges: Vec<f64> = (1..n_bins).map(|q| values[(q * n / n_bins).min(n - 1)]).collect();
    edges.dedup();
    // the top value must not be an edge, or the last bin would be empty
    if edges.last() == unique.last() {
        edges.pop();
    }
    edges
}

/// Hessian floor for the per-bin Newton step.
const HESSIAN_EPS: f64 = 1e-6;

/// Cyclic boosting: each round visits features in index order and adds
/// `lr ×` a per-bin Newton step on the current log-loss residuals.
pub fn train_additive(x: &[SparseVector], y: &[u8], cfg: &AdditiveConfig) -> Result<(AdditiveModel, TrainLog)> {
    check_training_data(x.len(), y)?;
    if cfg.n_bins < 2 || cfg.lr <= 0.0 {
        return Err(Error::InvalidInput("n_bins must be >= 2 and lr > 0".into()));
    }
    let n = x.len();
    let dim = x[0].dim();
    for v in x {
        check_dim(dim, v)?;
    }

    // Columns of nonzero entries.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    for (i, v) in x.iter().enumerate() {
        for (j, val) in v.iter() {
            columns[j].push((i, val));
        }
    }

    let mut shapes = Vec::with_capacity(dim);
    let mut sample_bins: Vec<Vec<(usize, usize)>> = Vec::with_capacity(dim);
    let mut zero_bins = Vec::with_capacity(dim);
    for col in &columns {
        let mut values: Vec<f64> = col.iter().map(|&(_, v)| v).collect();
        if col.len() < n {
            values.push(0.0);
        }
        let edges = quantile_edges(values, cfg.n_bins);
        let shape = ShapeFunction {
            scores: vec![0.0; edges.len() + 1],
            edges,
        };
        zero_bins.push(shape.bin(0.0));
        sample_bins.push(col.iter().map(|&(i, v)| (i, shape.bin(v))).collect());
        shapes.push(shape);
    }

    let base_rate = y.iter().map(|&l| l as f64).sum::<f64>() / n as f64;
    let mut intercept = logit(base_rate);
    // Per-sample logit = offset + delta[i].
    let mut offset = intercept;
    let mut delta = vec![0.0; n];
    let mut log = TrainLog::default();

    let mut grad = Vec::new();
    let mut hess = Vec::new();
    for round in 0..cfg.rounds {
        for j in 0..dim {
            let nb = shapes[j].scores.len();
            grad.clear();
            grad.resize(nb, 0.0);
            hess.clear();
            hess.resize(nb, 0.0);
            let mut g_total = 0.0;
            let mut h_total = 0.0;
            for i in 0..n {
                let p = sigmoid(offset + delta[i]);
                g_total += y[i] as f64 - p;
                h_total += p * (1.0 - p);
            }
            for &(i, b) in &sample_bins[j] {
                let p = sigmoid(offset + delta[i]);
                grad[b] += y[i] as f64 - p;
                hess[b] += p * (1.0 - p);
            }
            // Entries that are exactly zero are not in the column list; they all fall in the zero bin.
            let z = zero_bins[j];
            let zero_g = g_total - grad.iter().sum::<f64>();
            let zero_h = h_total - hess.iter().sum::<f64>();
            grad[z] += zero_g;
            hess[z] += zero_h;
            let steps: Vec<f64> = grad
                .iter()
                .zip(&hess)
                .map(|(g, h)| if *h > HESSIAN_EPS { cfg.lr * g / h } else { 0.0 })
                .collect();
            for (s, st) in shapes[j].scores.iter_mut().zip(&steps) {
                *s += st;
            }
            let shift = steps[z];
            offset += shift;
            for &(i, b) in &sample_bins[j] {
                delta[i] += steps[b] - shift;
            }
        }
        let loss = (0..n)
            .map(|i| super::log_loss(offset + delta[i], y[i]))
            .sum::<f64>()
            / n as f64;
        log.push_epoch(round, loss)?;
    }

    for (shape, &z) in shapes.iter_mut().zip(&zero_bins) {
        let anchor = shape.scores[z];
        shape.scores.iter_mut().for_each(|s| *s -= anchor);
        intercept += anchor;
    }
    Ok((AdditiveModel::new(shapes, intercept)?, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intercept_only_prediction() {
        let m = AdditiveModel::constant(3, 3f64.ln());
        let p = m.proba(&SparseVector::from_dense(&[0.2, 0.0, 7.0])).unwrap();
        assert!((p - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_rounds_predicts_base_rate() {
        let x: Vec<SparseVector> = (0..8).map(|i| SparseVector::from_dense(&[i as f64])).collect();
        let y = [0, 0, 0, 0, 0, 0, 1, 1];
        let (m, _) = train_additive(&x, &y, &AdditiveConfig { rounds: 0, ..Default::default() }).unwrap();
        for v in &x {
            assert!((m.proba(v).unwrap() - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_edges_are_strictly_increasing() {
        let vals: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64).collect();
        let e = quantile_edges(vals, 16);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        assert!(e.len() <= 15);
        assert!(quantile_edges(vec![0.0; 10], 8).is_empty());
    }

    /// y depends only on feature 3 out of 10; features 7..10 are identically zero.
    fn single_feature_data(n: usize, seed: u64) -> (Vec<SparseVector>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let mut row = [0.0; 10];
            for v in row.iter_mut().take(7) {
                *v = rng.random_range(-1.0..1.0);
            }
            let p = if row[3] > 0.0 { 0.9 } else { 0.1 };
            ys.push((rng.random::<f64>() < p) as u8);
            xs.push(SparseVector::from_dense(&row));
        }
        (xs, ys)
    }

    #[test]
    fn relevant_feature_dominates() {
        let (x, y) = single_feature_data(2000, 4);
        let cfg = AdditiveConfig { n_bins: 8, rounds: 40, lr: 0.1 };
        let (m, log) = train_additive(&x, &y, &cfg).unwrap();
        let range = |s: &ShapeFunction| {
            let hi = s.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = s.scores.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        };
        let r: Vec<f64> = m.shapes().iter().map(range).collect();
        let best = (0..10).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap();
        assert_eq!(best, 3, "{r:?}");
        assert!(r[3] > 2.0 * r.iter().enumerate().filter(|(j, _)| *j != 3).map(|(_, v)| *v).fold(0.0, f64::max));
        for j in 7..10 {
            assert!(m.shapes()[j].scores.iter().all(|&s| s == 0.0));
        }
        assert!(log.losses.last().unwrap() < log.losses.first().unwrap());
    }

    #[test]
    fn monotone_step_truth_gives_monotone_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..2000 {
            let v: f64 = rng.random_range(0.0..1.0);
            let p = 0.1 + 0.8 * ((v * 4.0).floor() / 3.0);
            ys.push((rng.random::<f64>() < p) as u8);
            xs.push(SparseVector::from_dense(&[v]));
        }
        let (m, _) = train_additive(&xs, &ys, &AdditiveConfig { n_bins: 4, rounds: 100, lr: 0.2 }).unwrap();
        let s = &m.shapes()[0].scores;
        assert!(s.windows(2).all(|w| w[1] > w[0] - 0.1), "{s:?}");
        assert!(s.last().unwrap() - s.first().unwrap() > 2.0);
    }

    #[test]
    fn sum_identity_on_random_points() {
        let (x, y) = single_feature_data(300, 2);
        let (m, _) = train_additive(&x, &y, &AdditiveConfig { n_bins: 8, rounds: 10, lr: 0.2 }).unwrap();
        for v in x.iter().take(50) {
            let dense = v.to_dense();
            let direct: f64 = m.intercept() + (0..10).map(|j| m.shape_value(j, dense[j])).sum::<f64>();
            assert!((direct - m.logit(v).unwrap()).abs() < 1e-12);
        }
        for s in m.shapes() {
            assert_eq!(s.eval(0.0), 0.0);
        }
    }
}
