//! Explanation-quality estimators: generalized local Lipschitz and infidelity,
//! plus the batch evaluation driver and its exports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attributions::{
    exact_shapley, integrated_gradients, kernel_shap, lime, saliency, truth_additive, truth_linear, Attribution,
    KernelShapConfig, LimeConfig, Method, ModelFn, Scored, UnitKind,
};
use crate::embeddings::{l2_distance, EmbeddingTable, NeighborIndex};
use crate::error::{Error, Result};
use crate::models::{sigmoid, AdditiveModel, BuiltinModel, EmbeddingClassifier, LinearModel, Target, VectorModel};
use crate::perturb::{
    componentwise_std, gaussian_matrix_perturbations, gaussian_perturbations, make_neighborhood, rowwise_std,
    GaussianNoiseConfig, PerturbationConfig, PerturbedDoc, Weighting,
};
use crate::plot::{boxplot_svg, BoxStats};
use crate::seeds::derive_seed;
use crate::sparse::SparseVector;
use crate::text::{Document, TfidfModel};

/// A numericalized input: a TF-IDF vector or a flattened embedding matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    Sparse(SparseVector),
    Dense(Vec<f64>),
}

impl Repr {
    pub fn norm(&self) -> f64 {
        match self {
            Repr::Sparse(v) => v.norm(),
            Repr::Dense(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn distance(&self, other: &Repr) -> Result<f64> {
        match (self, other) {
            (Repr::Sparse(a), Repr::Sparse(b)) if a.dim() == b.dim() => Ok(a.distance(b)),
            (Repr::Dense(a), Repr::Dense(b)) if a.len() == b.len() => Ok(l2_distance(a, b)),
            _ => Err(Error::InvalidInput("representations are not comparable".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzResult {
    pub doc_id: String,
    /// Absent when no perturbation fell inside the radius.
    pub value: Option<f64>,
    pub argmax_draw: Option<usize>,
    pub n_retained: usize,
    pub n_generated: usize,
    pub n_zero_distance: usize,
}

impl LipschitzResult {
    pub fn is_empty_neighborhood(&self) -> bool {
        self.n_retained == 0
    }
}

fn vec_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(l2_distance(a, b))
}

/// Max over retained draws of `‖φ(x_i) − φ(x_j)‖ / ‖x_i − x_j‖`. A draw is
/// retained when `0 < ‖x_i − x_j‖ / ‖x_i‖ ≤ eps`.
pub fn local_lipschitz(
    doc_id: &str,
    attrib_fn: &dyn Fn(&[String]) -> Result<Vec<f64>>,
    repr_fn: &dyn Fn(&[String]) -> Repr,
    tokens: &[String],
    neighborhood: &[PerturbedDoc],
    eps: f64,
) -> Result<LipschitzResult> {
    let x = repr_fn(tokens);
    let x_norm = x.norm();
    let mut result = LipschitzResult {
        doc_id: doc_id.to_string(),
        value: None,
        argmax_draw: None,
        n_retained: 0,
        n_generated: neighborhood.len(),
        n_zero_distance: 0,
    };
    let mut phi_x: Option<Vec<f64>> = None;
    for p in neighborhood {
        let xj = repr_fn(&p.tokens);
        let raw = x.distance(&xj)?;
        if raw == 0.0 {
            result.n_zero_distance += 1;
            continue;
        }
        if x_norm == 0.0 || raw / x_norm > eps {
            continue;
        }
        if phi_x.is_none() {
            phi_x = Some(attrib_fn(tokens)?);
        }
        let phi_j = attrib_fn(&p.tokens).map_err(|e| Error::DrawFailed {
            draw: p.draw,
            source: Box::new(e),
        })?;
        let ratio = vec_distance(phi_x.as_deref().unwrap_or_default(), &phi_j)? / raw;
        result.n_retained += 1;
        if result.value.is_none_or(|v| ratio > v) {
            result.value = Some(ratio);
            result.argmax_draw = Some(p.draw);
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfidelityResult {
    pub doc_id: String,
    pub value: f64,
    /// Standard error of the Monte-Carlo mean.
    pub std_error: f64,
    pub n_draws: usize,
    pub sigma_scale: f64,
    pub full_support: bool,
}

fn infidelity_result(doc_id: &str, residuals: &[f64], cfg: &GaussianNoiseConfig) -> Result<InfidelityResult> {
    let n = residuals.len() as f64;
    let sq: Vec<f64> = residuals.iter().map(|r| r * r).collect();
    let mean = sq.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return Err(Error::InvalidInput(format!("infidelity for {doc_id} is not finite")));
    }
    let var = if sq.len() > 1 {
        sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(InfidelityResult {
        doc_id: doc_id.to_string(),
        value: mean,
        std_error: (var / n).sqrt(),
        n_draws: residuals.len(),
        sigma_scale: cfg.sigma_scale,
        full_support: cfg.full_support,
    })
}

/// Mean over noise draws of `(Iᵀφ − (f(x) − f(x − I)))²` for a feature-kind attribution.
pub fn infidelity(
    doc_id: &str,
    model: &dyn ModelFn,
    attribution: &Attribution,
    x: &SparseVector,
    std: &[f64],
    cfg: &GaussianNoiseConfig,
) -> Result<InfidelityResult> {
    if attribution.unit_kind != UnitKind::Feature {
        return Err(Error::InvalidInput("vector-model infidelity needs a feature-kind attribution".into()));
    }
    if attribution.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: attribution.len(),
        });
    }
    let noise = gaussian_perturbations(x, std, cfg)?;
    let shifted: Vec<SparseVector> = noise
        .iter()
        .map(|n| {
            let mut d = x.to_dense();
            for (i, v) in n.iter() {
                d[i] -= v;
            }
            SparseVector::from_dense(&d)
        })
        .collect();
    let fx = model.eval(x)?;
    let f_shifted = model.eval_batch(&shifted)?;
    let residuals: Vec<f64> = noise
        .iter()
        .zip(&f_shifted)
        .map(|(n, fs)| n.dot_dense(&attribution.scores) - (fx - fs))
        .collect();
    infidelity_result(doc_id, &residuals, cfg)
}

/// Infidelity for a token-position attribution of the embedding classifier.
/// Noise is drawn per embedding coordinate of in-table tokens; a token's score
/// `a_t` is spread along its embedding as `a_t · e_t / ‖e_t‖²`.
pub fn infidelity_embedding(
    doc_id: &str,
    model: &EmbeddingClassifier,
    attribution: &Attribution,
    tokens: &[String],
    std: &[f64],
    cfg: &GaussianNoiseConfig,
) -> Result<InfidelityResult> {
    if attribution.unit_kind != UnitKind::TokenPosition || attribution.len() != tokens.len() {
        return Err(Error::InvalidInput(
            "embedding infidelity needs one attribution score per token".into(),
        ));
    }
    let dim = model.dim();
    if std.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: std.len(),
        });
    }
    let matrix = model.embed(tokens);
    let mut phi = vec![0.0; matrix.len()];
    let mut in_table = vec![false; tokens.len()];
    for (t, row) in matrix.chunks_exact(dim).enumerate() {
        in_table[t] = model.table.index_of(&tokens[t]).is_some();
        let sq: f64 = row.iter().map(|v| v * v).sum();
        if sq > 0.0 {
            for d in 0..dim {
                phi[t * dim + d] = attribution.scores[t] * row[d] / sq;
            }
        }
    }
    let eval = |m: &[f64]| {
        let z = model.logit_from_matrix(m);
        match attribution.target {
            Target::Logit => z,
            Target::Probability => sigmoid(z),
        }
    };
    let fx = eval(&matrix);
    let mut noise = gaussian_matrix_perturbations(tokens.len(), std, cfg)?;
    let mut residuals = Vec::with_capacity(noise.len());
    let mut shifted = vec![0.0; matrix.len()];
    for n in noise.iter_mut() {
        if !cfg.full_support {
            for (t, row) in n.chunks_exact_mut(dim).enumerate() {
                if !in_table[t] {
                    row.fill(0.0);
                }
            }
        }
        for ((s, m), v) in shifted.iter_mut().zip(&matrix).zip(n.iter()) {
            *s = m - v;
        }
        let ip: f64 = n.iter().zip(&phi).map(|(a, b)| a * b).sum();
        residuals.push(ip - (fx - eval(&shifted)));
    }
    infidelity_result(doc_id, &residuals, cfg)
}

/// Distribution summary with type-7 (linear interpolation) quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        Some(Summary {
            n: s.len(),
            min: s[0],
            q1: quantile(&s, 0.25),
            median: quantile(&s, 0.5),
            q3: quantile(&s, 0.75),
            max: s[s.len() - 1],
            mean: s.iter().sum::<f64>() / s.len() as f64,
        })
    }

    pub fn box_stats(&self) -> BoxStats {
        BoxStats {
            min: self.min,
            q1: self.q1,
            median: self.median,
            q3: self.q3,
            max: self.max,
        }
    }
}

/// Every setting that influences evaluation numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub pi: f64,
    pub k: usize,
    pub eps: f64,
    pub m: usize,
    pub lipschitz_docs: usize,
    pub infidelity_docs: usize,
    pub n_draws: usize,
    pub sigma_scale: f64,
    pub full_support: bool,
    pub weighting: Weighting,
    pub exclude: Vec<String>,
    pub target: Target,
    pub lime: LimeConfig,
    pub shap: KernelShapConfig,
    pub ig_steps: usize,
    pub seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            pi: 0.1,
            k: 10,
            eps: 0.25,
            m: 15,
            lipschitz_docs: 35,
            infidelity_docs: 100,
            n_draws: 50,
            sigma_scale: 0.1,
            full_support: false,
            weighting: Weighting::Uniform,
            exclude: Vec::new(),
            target: Target::Logit,
            lime: LimeConfig::default(),
            shap: KernelShapConfig::default(),
            ig_steps: 32,
            seed: 0,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        self.perturbation().validate()?;
        self.noise(0).validate()?;
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if self.m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        if self.ig_steps < 8 {
            return Err(Error::Config(format!("ig_steps must be at least 8, got {}", self.ig_steps)));
        }
        if self.lime.kernel_width <= 0.0 {
            return Err(Error::Config("lime.kernel_width must be positive".into()));
        }
        Ok(())
    }

    pub fn perturbation(&self) -> PerturbationConfig {
        PerturbationConfig {
            pi: self.pi,
            k: self.k,
            seed: self.seed,
            weighting: self.weighting,
            exclude: self.exclude.clone(),
        }
    }

    fn noise(&self, seed: u64) -> GaussianNoiseConfig {
        GaussianNoiseConfig {
            sigma_scale: self.sigma_scale,
            seed,
            n_draws: self.n_draws,
            full_support: self.full_support,
        }
    }
}

/// Source of exact attributions for interpretable models.
#[derive(Clone, Copy)]
pub enum Truth<'a> {
    Linear(&'a LinearModel),
    Additive(&'a AdditiveModel),
}

#[derive(Clone, Copy)]
pub enum SuiteModel<'a> {
    Vector {
        model: &'a dyn VectorModel,
        tfidf: &'a TfidfModel,
        truth: Option<Truth<'a>>,
    },
    Embedding(&'a EmbeddingClassifier),
}

impl<'a> SuiteModel<'a> {
    pub fn from_builtin(model: &'a BuiltinModel, tfidf: &'a TfidfModel) -> Self {
        match model {
            BuiltinModel::Linear(m) => SuiteModel::Vector {
                model: m,
                tfidf,
                truth: Some(Truth::Linear(m)),
            },
            BuiltinModel::Additive(m) => SuiteModel::Vector {
                model: m,
                tfidf,
                truth: Some(Truth::Additive(m)),
            },
            BuiltinModel::Forest(m) => SuiteModel::Vector { model: m, tfidf, truth: None },
            BuiltinModel::Embedding(m) => SuiteModel::Embedding(m),
        }
    }
}

pub struct SuitePair<'a> {
    pub model_id: String,
    pub method: Method,
    pub model: SuiteModel<'a>,
}

impl SuitePair<'_> {
    pub fn label(&self) -> String {
        format!("{}/{}", self.model_id, self.method.as_str())
    }

    /// Rejects (model, method) combinations that cannot be computed.
    pub fn check(&self) -> Result<()> {
        let ok = match (&self.model, self.method) {
            (SuiteModel::Vector { truth, .. }, Method::Truth) => truth.is_some(),
            (SuiteModel::Vector { .. }, Method::Lime | Method::Shap | Method::ExactShapley) => true,
            (SuiteModel::Embedding(_), Method::Saliency | Method::IntegratedGradients) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "attribution method {} is not available for model {}",
                self.method.as_str(),
                self.model_id
            )))
        }
    }

    fn repr(&self, tokens: &[String]) -> Repr {
        match &self.model {
            SuiteModel::Vector { tfidf, .. } => Repr::Sparse(tfidf.transform(tokens)),
            SuiteModel::Embedding(m) => Repr::Dense(m.embed(tokens)),
        }
    }

    /// Attribution of one token sequence with the given seed.
    pub fn attribute(&self, tokens: &[String], seed: u64, cfg: &MetricConfig) -> Result<Attribution> {
        let a = match (&self.model, self.method) {
            (SuiteModel::Vector { tfidf, truth, .. }, Method::Truth) => {
                let x = tfidf.transform(tokens);
                match truth {
                    Some(Truth::Linear(m)) => truth_linear(m, &x)?,
                    Some(Truth::Additive(m)) => truth_additive(m, &x)?,
                    None => return Err(Error::Config("no truth attribution".into())),
                }
            }
            (SuiteModel::Vector { model, tfidf, .. }, method) => {
                let x = tfidf.transform(tokens);
                let f = Scored {
                    model: *model,
                    target: cfg.target,
                };
                match method {
                    Method::Lime => lime(&f, &x, &LimeConfig { seed, ..cfg.lime })?,
                    Method::Shap => kernel_shap(&f, &x, None, &KernelShapConfig { seed, ..cfg.shap.clone() })?,
                    Method::ExactShapley => exact_shapley(&f, &x, None)?,
                    _ => return Err(Error::Config("gradient methods need the embedding classifier".into())),
                }
            }
            (SuiteModel::Embedding(m), Method::Saliency) => saliency(m, tokens, cfg.target)?,
            (SuiteModel::Embedding(m), Method::IntegratedGradients) => {
                integrated_gradients(m, tokens, None, cfg.ig_steps, cfg.target)?
            }
            (SuiteModel::Embedding(_), _) => {
                return Err(Error::Config("the embedding classifier supports saliency and integrated gradients".into()))
            }
        };
        Ok(a.with_model_id(self.model_id.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocError {
    pub doc_id: String,
    pub metric: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRun {
    pub model_id: String,
    pub method: Method,
    pub config: MetricConfig,
    pub lipschitz: Vec<LipschitzResult>,
    pub infidelity: Vec<InfidelityResult>,
    pub lipschitz_summary: Option<Summary>,
    pub infidelity_summary: Option<Summary>,
    pub n_empty_neighborhoods: usize,
    pub errors: Vec<DocError>,
    /// Set when the pair could not be evaluated at all.
    pub failure: Option<String>,
    pub notes: Vec<String>,
}

impl EvaluationRun {
    pub fn lipschitz_values(&self) -> Vec<f64> {
        self.lipschitz.iter().filter_map(|r| r.value).collect()
    }

    pub fn infidelity_values(&self) -> Vec<f64> {
        self.infidelity.iter().map(|r| r.value).collect()
    }
}

/// Seeded sample of up to `n` documents, returned in corpus order.
pub fn select_sample(n_docs: usize, n: usize, seed: u64, label: &str) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n_docs).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, label, 0));
    idx.shuffle(&mut rng);
    idx.truncate(n);
    idx.sort_unstable();
    idx
}

pub fn attribution_seed(seed: u64, doc_id: &str) -> u64 {
    derive_seed(seed, &format!("attribution:{doc_id}"), 0)
}

fn noise_seed(seed: u64, doc_id: &str) -> u64 {
    derive_seed(seed, &format!("noise:{doc_id}"), 0)
}

enum Task {
    Lipschitz { pair: usize, doc: usize },
    Infidelity { pair: usize, doc: usize },
}

enum TaskOut {
    Lipschitz(LipschitzResult),
    Infidelity(InfidelityResult),
}

/// Evaluates both metrics for every pair. Work runs on the current rayon
/// pool; results do not depend on its size. Invalid pairs are rejected up
/// front; per-document failures are recorded on the run.
pub fn evaluate_suite(
    pairs: &[SuitePair<'_>],
    docs: &[Document],
    table: &EmbeddingTable,
    index: &NeighborIndex,
    cfg: &MetricConfig,
) -> Result<Vec<EvaluationRun>> {
    cfg.validate()?;
    for p in pairs {
        p.check()?;
    }
    if docs.is_empty() {
        return Err(Error::InvalidInput("evaluation needs at least one document".into()));
    }
    let lip_docs = select_sample(docs.len(), cfg.lipschitz_docs, cfg.seed, "lipschitz-sample");
    let inf_docs = select_sample(docs.len(), cfg.infidelity_docs, cfg.seed, "infidelity-sample");
    let pcfg = cfg.perturbation();
    let hoods: Vec<Vec<PerturbedDoc>> = lip_docs
        .par_iter()
        .map(|&d| make_neighborhood(&docs[d], table, index, &pcfg, cfg.m))
        .collect::<Result<_>>()?;

    // Noise scales per representation, computed over the infidelity sample.
    let sparse_std: Vec<Option<Vec<f64>>> = pairs
        .iter()
        .map(|p| match &p.model {
            SuiteModel::Vector { tfidf, .. } => {
                let xs: Vec<SparseVector> = inf_docs.iter().map(|&d| tfidf.transform(&docs[d].tokens)).collect();
                componentwise_std(&xs).map(Some)
            }
            SuiteModel::Embedding(m) => {
                let ms: Vec<Vec<f64>> = inf_docs.iter().map(|&d| m.embed(&docs[d].tokens)).collect();
                rowwise_std(&ms, m.dim()).map(Some)
            }
        })
        .collect::<Result<_>>()?;

    let mut tasks = Vec::new();
    for pair in 0..pairs.len() {
        tasks.extend((0..lip_docs.len()).map(|doc| Task::Lipschitz { pair, doc }));
        tasks.extend((0..inf_docs.len()).map(|doc| Task::Infidelity { pair, doc }));
    }
    let outputs: Vec<(usize, String, &'static str, Result<TaskOut>)> = tasks
        .par_iter()
        .map(|t| match *t {
            Task::Lipschitz { pair, doc } => {
                let p = &pairs[pair];
                let d = &docs[lip_docs[doc]];
                let seed = attribution_seed(cfg.seed, &d.id);
                let attrib = |toks: &[String]| p.attribute(toks, seed, cfg).map(|a| a.scores);
                let repr = |toks: &[String]| p.repr(toks);
                let r = local_lipschitz(&d.id, &attrib, &repr, &d.tokens, &hoods[doc], cfg.eps).map(TaskOut::Lipschitz);
                (pair, d.id.clone(), "lipschitz", r)
            }
            Task::Infidelity { pair, doc } => {
                let p = &pairs[pair];
                let d = &docs[inf_docs[doc]];
                let std = sparse_std[pair].as_deref().unwrap_or_default();
                let noise = cfg.noise(noise_seed(cfg.seed, &d.id));
                let r = p
                    .attribute(&d.tokens, attribution_seed(cfg.seed, &d.id), cfg)
                    .and_then(|a| match &p.model {
                        SuiteModel::Vector { model, tfidf, .. } => {
                            let f = Scored {
                                model: *model,
                                target: a.target,
                            };
                            infidelity(&d.id, &f, &a, &tfidf.transform(&d.tokens), std, &noise)
                        }
                        SuiteModel::Embedding(m) => infidelity_embedding(&d.id, m, &a, &d.tokens, std, &noise),
                    })
                    .map(TaskOut::Infidelity);
                (pair, d.id.clone(), "infidelity", r)
            }
        })
        .collect();

    let mut runs: Vec<EvaluationRun> = pairs
        .iter()
        .map(|p| EvaluationRun {
            model_id: p.model_id.clone(),
            method: p.method,
            config: cfg.clone(),
            lipschitz: Vec::new(),
            infidelity: Vec::new(),
            lipschitz_summary: None,
            infidelity_summary: None,
            n_empty_neighborhoods: 0,
            errors: Vec::new(),
            failure: None,
            notes: match p.model {
                SuiteModel::Embedding(_) => vec![
                    "infidelity: token scores spread along each token's embedding as a_t*e_t/|e_t|^2".to_string(),
                ],
                SuiteModel::Vector { .. } => Vec::new(),
            },
        })
        .collect();
    for (pair, doc_id, metric, out) in outputs {
        let run = &mut runs[pair];
        match out {
            Ok(TaskOut::Lipschitz(r)) => run.lipschitz.push(r),
            Ok(TaskOut::Infidelity(r)) => run.infidelity.push(r),
            Err(e) => run.errors.push(DocError {
                doc_id,
                metric: metric.to_string(),
                message: e.to_string(),
            }),
        }
    }
    for (run, pair) in runs.iter_mut().zip(pairs) {
        run.n_empty_neighborhoods = run.lipschitz.iter().filter(|r| r.is_empty_neighborhood()).count();
        run.lipschitz_summary = Summary::of(&run.lipschitz_values());
        run.infidelity_summary = Summary::of(&run.infidelity_values());
        if run.lipschitz.is_empty() && run.infidelity.is_empty() {
            let first = run.errors.first().map(|e| e.message.clone()).unwrap_or_default();
            run.failure = Some(format!("{} failed on every document: {first}", pair.label()));
        }
    }
    Ok(runs)
}

/// One row per (pair, document, metric); empty neighborhoods are omitted.
pub fn runs_to_csv(runs: &[EvaluationRun]) -> String {
    let mut out = String::from("model,method,metric,doc_id,value\n");
    for r in runs {
        for l in &r.lipschitz {
            if let Some(v) = l.value {
                let _ = writeln!(out, "{},{},lipschitz,{},{}", r.model_id, r.method.as_str(), l.doc_id, v);
            }
        }
        for i in &r.infidelity {
            let _ = writeln!(out, "{},{},infidelity,{},{}", r.model_id, r.method.as_str(), i.doc_id, i.value);
        }
    }
    out
}

/// Writes `evaluation.json`, `evaluation.csv`, `lipschitz.svg` and `infidelity.svg`.
pub fn write_exports(runs: &[EvaluationRun], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, content: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, content)?;
        written.push(path);
        Ok(())
    };
    put("evaluation.json", serde_json::to_string_pretty(runs)? + "\n")?;
    put("evaluation.csv", runs_to_csv(runs))?;
    let groups = |f: fn(&EvaluationRun) -> Vec<f64>| -> Vec<(String, Vec<f64>)> {
        runs.iter()
            .map(|r| (format!("{} {}", r.model_id, r.method.as_str()), f(r)))
            .collect()
    };
    put(
        "lipschitz.svg",
        boxplot_svg("Local Lipschitz", "lipschitz", &groups(EvaluationRun::lipschitz_values)),
    )?;
    put(
        "infidelity.svg",
        boxplot_svg("Infidelity", "infidelity", &groups(EvaluationRun::infidelity_values)),
    )?;
    Ok(written)
}
