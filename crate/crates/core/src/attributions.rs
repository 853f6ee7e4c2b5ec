//! Local explanation methods.
//!
//! Feature-kind attributions live in the vocabulary space (length V);
//! position-kind attributions have one score per document token.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::models::{sigmoid, AdditiveModel, EmbeddingClassifier, LinearModel, Target, VectorModel};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitKind {
    Feature,
    TokenPosition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Truth,
    Lime,
    Shap,
    ExactShapley,
    Saliency,
    #[serde(alias = "ig")]
    IntegratedGradients,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Truth => "truth",
            Method::Lime => "lime",
            Method::Shap => "shap",
            Method::ExactShapley => "exact_shapley",
            Method::Saliency => "saliency",
            Method::IntegratedGradients => "integrated_gradients",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribution {
    pub unit_kind: UnitKind,
    pub scores: Vec<f64>,
    pub method: Method,
    pub model_id: String,
    pub target: Target,
    pub metadata: BTreeMap<String, Value>,
}

impl Attribution {
    fn new(unit_kind: UnitKind, scores: Vec<f64>, method: Method, target: Target) -> Self {
        Self {
            unit_kind,
            scores,
            method,
            model_id: String::new(),
            target,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_model_id(mut self, id: impl Into<String>) -> Self {
        self.model_id = id.into();
        self
    }

    fn meta(mut self, key: &str, value: Value) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScoresDump {
    Sparse(SparseVector),
    Dense(Vec<f64>),
}

/// On-disk attribution format; feature-kind scores are stored sparsely.
#[derive(Serialize, Deserialize)]
struct AttributionDump {
    unit_kind: UnitKind,
    scores: ScoresDump,
    method: Method,
    model_id: String,
    target: Target,
    metadata: BTreeMap<String, Value>,
}

impl Serialize for Attribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let scores = match self.unit_kind {
            UnitKind::Feature => ScoresDump::Sparse(SparseVector::from_dense(&self.scores)),
            UnitKind::TokenPosition => ScoresDump::Dense(self.scores.clone()),
        };
        AttributionDump {
            unit_kind: self.unit_kind,
            scores,
            method: self.method,
            model_id: self.model_id.clone(),
            target: self.target,
            metadata: self.metadata.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Attribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dump = AttributionDump::deserialize(d)?;
        let scores = match dump.scores {
            ScoresDump::Sparse(v) => v.to_dense(),
            ScoresDump::Dense(v) => v,
        };
        Ok(Attribution {
            unit_kind: dump.unit_kind,
            scores,
            method: dump.method,
            model_id: dump.model_id,
            target: dump.target,
            metadata: dump.metadata,
        })
    }
}

/// A scalar function over sparse inputs, evaluated in batches.
pub trait ModelFn: Sync {
    fn eval_batch(&self, xs: &[SparseVector]) -> Result<Vec<f64>>;

    fn eval(&self, x: &SparseVector) -> Result<f64> {
        Ok(self.eval_batch(std::slice::from_ref(x))?[0])
    }

    /// Output space the values live in.
    fn target(&self) -> Target {
        Target::Logit
    }
}

impl<F> ModelFn for F
where
    F: Fn(&SparseVector) -> f64 + Sync,
{
    fn eval_batch(&self, xs: &[SparseVector]) -> Result<Vec<f64>> {
        Ok(xs.iter().map(self).collect())
    }
}

/// A vector model read out in a given target space.
pub struct Scored<'a> {
    pub model: &'a dyn VectorModel,
    pub target: Target,
}

impl ModelFn for Scored<'_> {
    fn eval_batch(&self, xs: &[SparseVector]) -> Result<Vec<f64>> {
        self.model.eval_batch(xs, self.target)
    }

    fn target(&self) -> Target {
        self.target
    }
}

// ---------------------------------------------------------------------------
// Truth attributions

pub fn truth_linear(model: &LinearModel, x: &SparseVector) -> Result<Attribution> {
    if x.dim() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            actual: x.dim(),
        });
    }
    let mut scores = vec![0.0; x.dim()];
    for (i, v) in x.iter() {
        scores[i] = model.weights[i] * v;
    }
    Ok(Attribution::new(UnitKind::Feature, scores, Method::Truth, Target::Logit))
}

/// `score_j = shape_j(x_j)` for every feature; with the intercept these sum to the logit.
pub fn truth_additive(model: &AdditiveModel, x: &SparseVector) -> Result<Attribution> {
    if x.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: x.dim(),
        });
    }
    let scores = (0..x.dim()).map(|j| model.shape_value(j, x.get(j))).collect();
    Ok(Attribution::new(UnitKind::Feature, scores, Method::Truth, Target::Logit)
        .meta("intercept", json!(model.intercept())))
}

// ---------------------------------------------------------------------------
// LIME

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimeConfig {
    pub n_samples: usize,
    pub kernel_width: f64,
    pub n_report_features: usize,
    pub seed: u64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self {
            n_samples: 500,
            kernel_width: 0.75,
            n_report_features: 10,
            seed: 0,
        }
    }
}

pub const LIME_RIDGE: f64 = 1e-3;

fn cosine_distance(a: &SparseVector, b: &SparseVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    1.0 - a.dot(b) / (na * nb)
}

/// `x` restricted to the features whose mask bit is set, rescaled to `‖x‖`.
pub fn masked_instance(x: &SparseVector, mask: &[bool]) -> SparseVector {
    let kept = SparseVector::from_sorted_pairs(
        x.dim(),
        x.iter().zip(mask).filter(|(_, &keep)| keep).map(|(p, _)| p),
    );
    let n = kept.norm();
    if n == 0.0 {
        return kept;
    }
    let scale = x.norm() / n;
    SparseVector::from_sorted_pairs(x.dim(), kept.iter().map(|(i, v)| (i, v * scale)))
}

pub fn lime_kernel(x: &SparseVector, masked: &SparseVector, kernel_width: f64) -> f64 {
    let d = cosine_distance(x, masked);
    (-(d * d) / (kernel_width * kernel_width)).exp()
}

/// Solves `(AᵀWA + Λ) β = AᵀW y` where Λ adds `ridge` to every column but the first.
fn weighted_ridge(design: &DMatrix<f64>, y: &[f64], w: &[f64], ridge: f64, penalize_first: bool) -> Result<DVector<f64>> {
    let p = design.ncols();
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    for (r, (yr, wr)) in y.iter().zip(w).enumerate() {
        let row = design.row(r);
        for a in 0..p {
            let wa = wr * row[a];
            if wa == 0.0 {
                continue;
            }
            rhs[a] += wa * yr;
            for b in a..p {
                gram[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
        if a > 0 || penalize_first {
            gram[(a, a)] += ridge;
        }
    }
    let chol = gram.cholesky().ok_or(Error::Singular)?;
    Ok(chol.solve(&rhs))
}

/// Minimum-norm weighted least squares, for rank-deficient sampled systems.
fn min_norm_wls(design: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Option<DVector<f64>> {
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let a = DMatrix::from_fn(design.nrows(), design.ncols(), |r, c| design[(r, c)] * sw[r]);
    let b = DVector::from_iterator(y.len(), y.iter().zip(&sw).map(|(v, s)| v * s));
    let svd = a.svd(true, true);
    let tol = svd.singular_values.max() * 1e-12 * design.nrows().max(design.ncols()) as f64;
    svd.solve(&b, tol).ok().filter(|x| x.iter().all(|v| v.is_finite()))
}

/// LIME with a caller-provided set of masks over the nonzero features of `x`.
pub fn lime_with_masks(
    model: &dyn ModelFn,
    x: &SparseVector,
    masks: &[Vec<bool>],
    kernel_width: f64,
    n_report_features: usize,
) -> Result<Attribution> {
    let m = x.nnz();
    if m == 0 {
        return Err(Error::InvalidInput("LIME needs at least one nonzero feature".into()));
    }
    if masks.iter().any(|mk| mk.len() != m) {
        return Err(Error::InvalidInput(format!("every mask must have {m} bits")));
    }
    if masks.len() < 2 || masks.iter().all(|mk| *mk == masks[0]) {
        return Err(Error::DegenerateSampling { n_samples: masks.len() });
    }
    let instances: Vec<SparseVector> = masks.iter().map(|mk| masked_instance(x, mk)).collect();
    let weights: Vec<f64> = instances.iter().map(|v| lime_kernel(x, v, kernel_width)).collect();
    let y = model.eval_batch(&instances)?;
    let design = DMatrix::from_fn(masks.len(), m + 1, |r, c| {
        if c == 0 {
            1.0
        } else {
            masks[r][c - 1] as u8 as f64
        }
    });
    let beta = weighted_ridge(&design, &y, &weights, LIME_RIDGE, false)?;

    let wsum: f64 = weights.iter().sum();
    let ymean = y.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>() / wsum;
    let fitted = &design * &beta;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for r in 0..y.len() {
        ss_res += weights[r] * (y[r] - fitted[r]).powi(2);
        ss_tot += weights[r] * (y[r] - ymean).powi(2);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| beta[b + 1].abs().total_cmp(&beta[a + 1].abs()).then(a.cmp(&b)));
    let mut scores = vec![0.0; x.dim()];
    for &k in order.iter().take(n_report_features) {
        scores[x.indices()[k]] = beta[k + 1];
    }
    Ok(Attribution::new(UnitKind::Feature, scores, Method::Lime, model.target())
        .meta("surrogate_r2", json!(r2))
        .meta("surrogate_intercept", json!(beta[0]))
        .meta("kernel_width", json!(kernel_width))
        .meta("n_report_features", json!(n_report_features))
        .meta("n_samples", json!(masks.len()))
        .meta("ridge", json!(LIME_RIDGE)))
}

/// Samples Bernoulli(0.5) masks over the nonzero features of `x` and fits a
/// proximity-weighted ridge surrogate from mask bits to model outputs.
pub fn lime(model: &dyn ModelFn, x: &SparseVector, cfg: &LimeConfig) -> Result<Attribution> {
    let m = x.nnz();
    if m == 0 {
        return Err(Error::InvalidInput("LIME needs at least one nonzero feature".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let masks: Vec<Vec<bool>> = (0..cfg.n_samples)
        .map(|_| (0..m).map(|_| rng.random::<bool>()).collect())
        .collect();
    Ok(lime_with_masks(model, x, &masks, cfg.kernel_width, cfg.n_report_features)?.meta("seed", json!(cfg.seed)))
}

// ---------------------------------------------------------------------------
// Shapley values

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelShapConfig {
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for KernelShapConfig {
    fn default() -> Self {
        Self { n_samples: 512, seed: 0 }
    }
}

/// Coordinates where `x` and the background differ: the game's players.
fn players(x: &SparseVector, background: &SparseVector) -> Vec<usize> {
    let mut out: Vec<usize> = x
        .indices()
        .iter()
        .chain(background.indices())
        .copied()
        .filter(|&i| x.get(i) != background.get(i))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Input where present players take `x`'s value and absent ones the background's.
fn coalition_input(x: &SparseVector, background: &SparseVector, players: &[usize], present: &[bool]) -> SparseVector {
    let mut union: Vec<usize> = x.indices().iter().chain(background.indices()).copied().collect();
    union.sort_unstable();
    union.dedup();
    let mut p = 0;
    SparseVector::from_sorted_pairs(
        x.dim(),
        union.into_iter().map(|i| {
            while p < players.len() && players[p] < i {
                p += 1;
            }
            let is_player = p < players.len() && players[p] == i;
            let v = if is_player && !present[p] { background.get(i) } else { x.get(i) };
            (i, v)
        }),
    )
}

fn check_background(x: &SparseVector, background: Option<&SparseVector>) -> Result<SparseVector> {
    match background {
        Some(b) if b.dim() != x.dim() => Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: b.dim(),
        }),
        Some(b) => Ok(b.clone()),
        None => Ok(SparseVector::zeros(x.dim())),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shapley kernel weight for a coalition of size `s` among `m` players.
pub fn shapley_kernel(m: usize, s: usize) -> f64 {
    (m - 1) as f64 / (binomial(m, s) * s as f64 * (m - s) as f64)
}

/// Kernel SHAP with the efficiency constraint `Σφ = f(x) − f(background)`
/// imposed exactly by eliminating the last player. Coalitions are fully
/// enumerated when `2^m − 2 ≤ n_samples`, otherwise sampled in complementary
/// pairs with kernel-proportional sizes.
pub fn kernel_shap(
    model: &dyn ModelFn,
    x: &SparseVector,
    background: Option<&SparseVector>,
    cfg: &KernelShapConfig,
) -> Result<Attribution> {
    let bg = check_background(x, background)?;
    let pl = players(x, &bg);
    let m = pl.len();
    let f_x = model.eval(x)?;
    let f_bg = model.eval(&bg)?;
    let delta = f_x - f_bg;
    let mut scores = vec![0.0; x.dim()];
    let base = |a: Attribution, enumerated: bool, n_coalitions: usize| {
        a.meta("n_samples", json!(cfg.n_samples))
            .meta("seed", json!(cfg.seed))
            .meta("n_players", json!(m))
            .meta("enumerated", json!(enumerated))
            .meta("n_coalitions", json!(n_coalitions))
            .meta("f_x", json!(f_x))
            .meta("f_background", json!(f_bg))
            .meta("background_nnz", json!(bg.nnz()))
    };
    if m <= 1 {
        if m == 1 {
            scores[pl[0]] = delta;
        }
        let a = Attribution::new(UnitKind::Feature, scores, Method::Shap, model.target());
        return Ok(base(a, true, 0));
    }

    let enumerate = m < 63 && (1u64 << m) - 2 <= cfg.n_samples as u64;
    let mut coalitions: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
    if enumerate {
        for bits in 1..(1u64 << m) - 1 {
            let mask: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
            let s = bits.count_ones() as usize;
            coalitions.insert(mask, shapley_kernel(m, s));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let size_weights: Vec<f64> = (1..m).map(|s| 1.0 / (s * (m - s)) as f64).collect();
        let total: f64 = size_weights.iter().sum();
        let pairs = cfg.n_samples.div_ceil(2).max(1);
        for _ in 0..pairs {
            let mut u = rng.random::<f64>() * total;
            let mut s = m - 1;
            for (k, w) in size_weights.iter().enumerate() {
                if u < *w {
                    s = k + 1;
                    break;
                }
                u -= w;
            }
            let mut mask = vec![false; m];
            for i in index::sample(&mut rng, m, s) {
                mask[i] = true;
            }
            let complement: Vec<bool> = mask.iter().map(|b| !b).collect();
            *coalitions.entry(mask).or_insert(0.0) += 1.0;
            *coalitions.entry(complement).or_insert(0.0) += 1.0;
        }
    }

    let masks: Vec<&Vec<bool>> = coalitions.keys().collect();
    let weights: Vec<f64> = coalitions.values().copied().collect();
    let inputs: Vec<SparseVector> = masks.iter().map(|mk| coalition_input(x, &bg, &pl, mk)).collect();
    let values = model.eval_batch(&inputs)?;

    let last = m - 1;
    let design = DMatrix::from_fn(masks.len(), last, |r, c| masks[r][c] as u8 as f64 - masks[r][last] as u8 as f64);
    let y: Vec<f64> = values
        .iter()
        .zip(&masks)
        .map(|(v, mk)| v - f_bg - mk[last] as u8 as f64 * delta)
        .collect();
    let phi = match weighted_ridge(&design, &y, &weights, 0.0, true) {
        Ok(phi) => phi,
        Err(_) => min_norm_wls(&design, &y, &weights).ok_or(Error::DegenerateSampling {
            n_samples: cfg.n_samples,
        })?,
    };
    let partial: f64 = phi.iter().sum();
    for (k, &p) in pl.iter().take(last).enumerate() {
        scores[p] = phi[k];
    }
    scores[pl[last]] = delta - partial;
    let residual = scores.iter().sum::<f64>() - delta;
    let a = Attribution::new(UnitKind::Feature, scores, Method::Shap, model.target())
        .meta("efficiency_residual", json!(residual));
    Ok(base(a, enumerate, masks.len()))
}

pub const EXACT_SHAPLEY_MAX_PLAYERS: usize = 15;

/// Exact Shapley values by enumerating every subset of the players.
pub fn exact_shapley(model: &dyn ModelFn, x: &SparseVector, background: Option<&SparseVector>) -> Result<Attribution> {
    let bg = check_background(x, background)?;
    let pl = players(x, &bg);
    let m = pl.len();
    if m > EXACT_SHAPLEY_MAX_PLAYERS {
        return Err(Error::TooManyFeatures {
            players: m,
            limit: EXACT_SHAPLEY_MAX_PLAYERS,
        });
    }
    let n = 1usize << m;
    let inputs: Vec<SparseVector> = (0..n)
        .map(|bits| {
            let mask: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
            coalition_input(x, &bg, &pl, &mask)
        })
        .collect();
    let values = model.eval_batch(&inputs)?;
    let fact: Vec<f64> = (0..=m).scan(1.0, |acc, k| {
        if k > 0 {
            *acc *= k as f64;
        }
        Some(*acc)
    }).collect();
    let mut scores = vec![0.0; x.dim()];
    for (i, &p) in pl.iter().enumerate() {
        let mut phi = 0.0;
        for s in 0..n {
            if s >> i & 1 == 1 {
                continue;
            }
            let size = s.count_ones() as usize;
            let w = fact[size] * fact[m - size - 1] / fact[m];
            phi += w * (values[s | 1 << i] - values[s]);
        }
        scores[p] = phi;
    }
    Ok(Attribution::new(UnitKind::Feature, scores, Method::ExactShapley, model.target())
        .meta("n_players", json!(m)))
}

// ---------------------------------------------------------------------------
// Gradient methods on the embedding classifier

fn target_gradient(model: &EmbeddingClassifier, matrix: &[f64], target: Target) -> Vec<f64> {
    let g = model.gradient_from_matrix(matrix);
    match target {
        Target::Logit => g,
        Target::Probability => {
            let p = sigmoid(model.logit_from_matrix(matrix));
            let s = p * (1.0 - p);
            g.into_iter().map(|v| v * s).collect()
        }
    }
}

fn target_value(model: &EmbeddingClassifier, matrix: &[f64], target: Target) -> f64 {
    let z = model.logit_from_matrix(matrix);
    match target {
        Target::Logit => z,
        Target::Probability => sigmoid(z),
    }
}

/// Per-token ℓ2 norm of the target's gradient row.
pub fn saliency(model: &EmbeddingClassifier, tokens: &[String], target: Target) -> Result<Attribution> {
    if tokens.is_empty() {
        return Err(Error::InvalidInput("token sequence is empty".into()));
    }
    let matrix = model.embed(tokens);
    let grad = target_gradient(model, &matrix, target);
    let scores = grad
        .chunks_exact(model.dim())
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    Ok(Attribution::new(UnitKind::TokenPosition, scores, Method::Saliency, target)
        .meta("aggregation", json!("l2-norm"))
        .meta("pooling", json!("mean")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IgConfig {
    pub steps: usize,
}

impl Default for IgConfig {
    fn default() -> Self {
        Self { steps: 32 }
    }
}

/// Integrated gradients along the straight path from `baseline` (default:
/// all-zero embeddings), midpoint rule with `steps` points, summed over the
/// embedding dimension per token.
pub fn integrated_gradients(
    model: &EmbeddingClassifier,
    tokens: &[String],
    baseline: Option<&[f64]>,
    steps: usize,
    target: Target,
) -> Result<Attribution> {
    if tokens.is_empty() {
        return Err(Error::InvalidInput("token sequence is empty".into()));
    }
    if steps < 8 {
        return Err(Error::InvalidInput(format!("integrated gradients needs steps >= 8, got {steps}")));
    }
    let input = model.embed(tokens);
    let zeros;
    let base = match baseline {
        Some(b) if b.len() != input.len() => {
            return Err(Error::DimensionMismatch {
                expected: input.len(),
                actual: b.len(),
            })
        }
        Some(b) => b,
        None => {
            zeros = vec![0.0; input.len()];
            &zeros
        }
    };
    let diff: Vec<f64> = input.iter().zip(base).map(|(a, b)| a - b).collect();
    let mut avg = vec![0.0; input.len()];
    let mut point = vec![0.0; input.len()];
    for k in 0..steps {
        let alpha = (k as f64 + 0.5) / steps as f64;
        for ((p, b), d) in point.iter_mut().zip(base).zip(&diff) {
            *p = b + alpha * d;
        }
        for (a, g) in avg.iter_mut().zip(target_gradient(model, &point, target)) {
            *a += g;
        }
    }
    let inv = 1.0 / steps as f64;
    let scores: Vec<f64> = diff
        .chunks_exact(model.dim())
        .zip(avg.chunks_exact(model.dim()))
        .map(|(d, g)| d.iter().zip(g).map(|(a, b)| a * b * inv).sum())
        .collect();
    let residual = (scores.iter().sum::<f64>() - (target_value(model, &input, target) - target_value(model, base, target))).abs();
    Ok(Attribution::new(UnitKind::TokenPosition, scores, Method::IntegratedGradients, target)
        .meta("steps", json!(steps))
        .meta("completeness_residual", json!(residual))
        .meta("baseline", json!(if baseline.is_some() { "custom" } else { "zero-embeddings" }))
        .meta("aggregation", json!("signed-dim-sum"))
        .meta("pooling", json!("mean")))
}
