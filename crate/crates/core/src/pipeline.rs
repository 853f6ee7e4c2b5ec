//! Config-driven runs: training, evaluation, frontier reports and
//! perturbation dumps. Every artifact is a function of (config, seed, inputs).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::attributions::Method;
use crate::embeddings::{build_neighbor_index, load_embeddings, train_embeddings, EmbeddingTable};
use crate::error::{Error, Result};
use crate::metrics::{attribution_seed, evaluate_suite, select_sample, write_exports, EvaluationRun, MetricConfig, SuiteModel, SuitePair};
use crate::models::{
    predict_proba, train_additive, train_embedding_classifier, train_forest, train_logistic, AdditiveConfig, BuiltinModel,
    Classifier, EmbeddingClassifierConfig, ExternalModel, ForestConfig, Input, LogisticConfig, RepresentationKind, TrainLog,
};
use crate::perturb::{make_neighborhood, verify_perturbation};
use crate::seeds::derive_seed;
use crate::text::{build_vocab, fit_tfidf, read_corpus, Document, TfidfModel, VocabConfig};
use crate::tradeoff::{
    auc, frontier_svg, frontier_table, overlap_report, pareto_frontier, weighted_rank, CandidatePoint, Constraint, Objective,
    ObjectiveSpec, ParetoResult, Ranking, Weight,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "XQUAL_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "xqual-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingSource {
    Load { path: PathBuf },
    Train { dim: usize, window: usize },
}

impl Default for EmbeddingSource {
    fn default() -> Self {
        EmbeddingSource::Train { dim: 32, window: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Additive,
    Forest,
    Embedding,
    External,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Additive => "additive",
            ModelKind::Forest => "forest",
            ModelKind::Embedding => "embedding",
            ModelKind::External => "external",
        }
    }

    fn supports(self, method: Method) -> bool {
        use Method::*;
        match self {
            ModelKind::Linear | ModelKind::Additive => matches!(method, Truth | Lime | Shap | ExactShapley),
            ModelKind::Forest | ModelKind::External => matches!(method, Lime | Shap | ExactShapley),
            ModelKind::Embedding => matches!(method, Saliency | IntegratedGradients),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub id: String,
    pub kind: ModelKind,
    /// Trainer hyperparameters; the trainer seed is always derived from the run seed.
    #[serde(default)]
    pub params: Value,
    /// Adapter command line for external models.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributionSpec {
    pub model: String,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierConfig {
    /// Objectives of the Pareto scan, each in its natural direction.
    pub objectives: Vec<Objective>,
    /// Quality metric on the scatter's horizontal axis.
    pub quality: Objective,
    pub weights: Vec<Weight>,
    pub constraints: Vec<Constraint>,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self {
            objectives: vec![Objective::Auc, Objective::Infidelity],
            quality: Objective::Infidelity,
            weights: Objective::ALL.iter().map(|&field| Weight { field, weight: 1.0 }).collect(),
            constraints: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub vocabulary: VocabConfig,
    #[serde(default)]
    pub embeddings: EmbeddingSource,
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub attributions: Vec<AttributionSpec>,
    #[serde(default)]
    pub metrics: MetricConfig,
    #[serde(default)]
    pub frontier: FrontierConfig,
    pub seed: u64,
}

fn params<T: DeserializeOwned + Default>(spec: &ModelSpec) -> Result<T> {
    if spec.params.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(spec.params.clone())
        .map_err(|e| Error::Config(format!("model {}: invalid params: {e}", spec.id)))
}

impl RunConfig {
    /// Parses and validates a config; relative paths resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.train);
        fix(&mut self.test);
        if let Some(o) = self.output_dir.as_mut() {
            fix(o);
        }
        if let EmbeddingSource::Load { path } = &mut self.embeddings {
            fix(path);
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, p) in [("train corpus", &self.train), ("test corpus", &self.test)] {
            if !p.is_file() {
                return Err(Error::Config(format!("{what} {} does not exist", p.display())));
            }
        }
        match &self.embeddings {
            EmbeddingSource::Load { path } if !path.is_file() => {
                return Err(Error::Config(format!("embedding file {} does not exist", path.display())))
            }
            EmbeddingSource::Train { dim, window } if *dim == 0 || *window == 0 => {
                return Err(Error::Config("embedding dim and window must be positive".into()))
            }
            _ => {}
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models configured".into()));
        }
        let mut ids = BTreeSet::new();
        for m in &self.models {
            if m.id.is_empty() || !m.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(Error::Config(format!("model id {:?} must be non-empty [A-Za-z0-9_-]", m.id)));
            }
            if !ids.insert(m.id.as_str()) {
                return Err(Error::Config(format!("duplicate model id {}", m.id)));
            }
            match m.kind {
                ModelKind::Linear => drop(params::<LogisticConfig>(m)?),
                ModelKind::Additive => drop(params::<AdditiveConfig>(m)?),
                ModelKind::Forest => drop(params::<ForestConfig>(m)?),
                ModelKind::Embedding => drop(params::<EmbeddingClassifierConfig>(m)?),
                ModelKind::External => {
                    if m.command.is_empty() {
                        return Err(Error::Config(format!("external model {} needs a command", m.id)));
                    }
                    if !m.params.is_null() {
                        return Err(Error::Config(format!("external model {} takes no params", m.id)));
                    }
                }
            }
            if m.kind != ModelKind::External && !m.command.is_empty() {
                return Err(Error::Config(format!("model {}: command is only valid for external models", m.id)));
            }
            if m.timeout_secs.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
                return Err(Error::Config(format!("model {}: timeout_secs must be positive", m.id)));
            }
        }
        for a in &self.attributions {
            let Some(model) = self.models.iter().find(|m| m.id == a.model) else {
                return Err(Error::Config(format!("attributions reference unknown model {}", a.model)));
            };
            for &method in &a.methods {
                if !model.kind.supports(method) {
                    return Err(Error::Config(format!(
                        "invalid pair {}/{}: {} is not available for a {} model",
                        a.model,
                        method.as_str(),
                        method.as_str(),
                        model.kind.as_str()
                    )));
                }
            }
        }
        self.metrics.validate()?;
        if self.frontier.objectives.is_empty() {
            return Err(Error::Config("frontier needs at least one objective".into()));
        }
        Ok(())
    }

    /// Output directory: the config's, else `$XQUAL_OUT_DIR`, else `xqual-out`.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    /// Metric settings with the run seed applied.
    pub fn metric_config(&self) -> MetricConfig {
        MetricConfig {
            seed: self.seed,
            ..self.metrics.clone()
        }
    }

    fn model_seed(&self, id: &str) -> u64 {
        derive_seed(self.seed, &format!("model:{id}"), 0)
    }

    fn timeout(spec: &ModelSpec) -> Duration {
        spec.timeout_secs
            .map(Duration::from_secs_f64)
            .unwrap_or(crate::models::external::DEFAULT_TIMEOUT)
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainEntry {
    pub id: String,
    pub kind: ModelKind,
    pub auc: Option<f64>,
    pub error: Option<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub vocabulary_size: usize,
    pub models: Vec<TrainEntry>,
}

impl TrainSummary {
    pub fn has_failures(&self) -> bool {
        self.models.iter().any(|m| m.error.is_some())
    }

    /// AUC table in the layout of a classifier performance table.
    pub fn table(&self) -> String {
        let mut out = format!("{:<20} {:<10} {:>8}\n", "model", "kind", "auc");
        for m in &self.models {
            let auc = m.auc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "failed".into());
            let _ = writeln!(out, "{:<20} {:<10} {:>8}", m.id, m.kind.as_str(), auc);
        }
        out
    }
}

fn read_corpora(cfg: &RunConfig) -> Result<(Vec<Document>, Vec<Document>)> {
    Ok((read_corpus(&cfg.train, "train")?, read_corpus(&cfg.test, "test")?))
}

fn load_or_train_embeddings(cfg: &RunConfig, train: &[Document]) -> Result<EmbeddingTable> {
    match &cfg.embeddings {
        EmbeddingSource::Load { path } => load_embeddings(path),
        EmbeddingSource::Train { dim, window } => train_embeddings(train, *dim, *window),
    }
}

fn external_auc(model: &ExternalModel, tfidf: &TfidfModel, test: &[Document]) -> Result<f64> {
    let labels: Vec<u8> = test.iter().map(|d| d.label).collect();
    let scores = match model.representation() {
        RepresentationKind::SparseVector => {
            let xs: Vec<_> = test.iter().map(|d| tfidf.transform_doc(d)).collect();
            let inputs: Vec<Input<'_>> = xs.iter().map(Input::Sparse).collect();
            model.predict(&inputs)?
        }
        RepresentationKind::TokenSequence => {
            let inputs: Vec<Input<'_>> = test.iter().map(|d| Input::Tokens(&d.tokens)).collect();
            model.predict(&inputs)?
        }
    };
    auc(&scores, &labels)
}

fn builtin_auc(model: &BuiltinModel, tfidf: &TfidfModel, test: &[Document]) -> Result<f64> {
    let labels: Vec<u8> = test.iter().map(|d| d.label).collect();
    let scores = test
        .iter()
        .map(|d| match model.representation() {
            RepresentationKind::SparseVector => predict_proba(model, Input::Sparse(&tfidf.transform_doc(d))),
            RepresentationKind::TokenSequence => predict_proba(model, Input::Tokens(&d.tokens)),
        })
        .collect::<Result<Vec<f64>>>()?;
    auc(&scores, &labels)
}

fn train_one(cfg: &RunConfig, spec: &ModelSpec, x: &[crate::SparseVector], y: &[u8], train: &[Document], table: &EmbeddingTable) -> Result<(BuiltinModel, TrainLog)> {
    let seed = cfg.model_seed(&spec.id);
    Ok(match spec.kind {
        ModelKind::Linear => {
            let (m, log) = train_logistic(x, y, &LogisticConfig { seed, ..params(spec)? })?;
            (BuiltinModel::Linear(m), log)
        }
        ModelKind::Additive => {
            let (m, log) = train_additive(x, y, &params(spec)?)?;
            (BuiltinModel::Additive(m), log)
        }
        ModelKind::Forest => {
            let m = train_forest(x, y, &ForestConfig { seed, ..params(spec)? })?;
            (BuiltinModel::Forest(m), TrainLog::default())
        }
        ModelKind::Embedding => {
            let (m, log) = train_embedding_classifier(train, table, &EmbeddingClassifierConfig { seed, ..params(spec)? })?;
            (BuiltinModel::Embedding(m), log)
        }
        ModelKind::External => unreachable!("external models are not trained"),
    })
}

/// Trains every configured model and writes the text model, embeddings,
/// model files, training logs and `auc.json` under `out`. A failing model is
/// recorded and the remaining models still run.
pub fn run_train(cfg: &RunConfig, out: &Path) -> Result<TrainSummary> {
    let (train, test) = read_corpora(cfg)?;
    let vocab = build_vocab(&train, &cfg.vocabulary)?;
    let tfidf = fit_tfidf(&train, vocab)?;
    write_json(&out.join("text_model.json"), &tfidf)?;
    let table = load_or_train_embeddings(cfg, &train)?;
    write_json(&out.join("embeddings.json"), &table)?;

    let x: Vec<_> = train.iter().map(|d| tfidf.transform_doc(d)).collect();
    let y: Vec<u8> = train.iter().map(|d| d.label).collect();
    let mut entries = Vec::new();
    for spec in &cfg.models {
        let mut entry = TrainEntry {
            id: spec.id.clone(),
            kind: spec.kind,
            auc: None,
            error: None,
            warnings: Vec::new(),
        };
        let result = if spec.kind == ModelKind::External {
            ExternalModel::connect(spec.command.clone(), tfidf.dim(), RunConfig::timeout(spec))
                .and_then(|m| external_auc(&m, &tfidf, &test))
        } else {
            train_one(cfg, spec, &x, &y, &train, &table).and_then(|(model, log)| {
                entry.warnings = log.warnings.clone();
                write_json(&out.join("models").join(format!("{}.json", spec.id)), &model)?;
                write_json(&out.join("logs").join(format!("{}.json", spec.id)), &log)?;
                builtin_auc(&model, &tfidf, &test)
            })
        };
        match result {
            Ok(a) => entry.auc = Some(a),
            Err(e) => {
                log::error!("model {} failed: {e}", spec.id);
                entry.error = Some(e.to_string());
            }
        }
        entries.push(entry);
    }
    let summary = TrainSummary {
        seed: cfg.seed,
        n_train: train.len(),
        n_test: test.len(),
        vocabulary_size: tfidf.dim(),
        models: entries,
    };
    write_json(&out.join("auc.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSummary {
    pub model_id: String,
    pub surrogate: Method,
    pub top_k: usize,
    pub n_docs: usize,
    pub mean_overlap: f64,
    pub mean_rank_correlation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateSummary {
    pub runs: Vec<EvaluationRun>,
    pub overlap: Vec<OverlapSummary>,
    pub exports: Vec<PathBuf>,
}

impl EvaluateSummary {
    pub fn has_failures(&self) -> bool {
        self.runs.iter().any(|r| r.failure.is_some() || !r.errors.is_empty())
    }
}

enum Loaded {
    Builtin(BuiltinModel),
    External(ExternalModel),
}

pub const OVERLAP_TOP_K: usize = 10;

/// Truth-vs-surrogate top-k overlap over the Lipschitz document sample.
fn overlap_summaries(pairs: &[SuitePair<'_>], docs: &[Document], mcfg: &MetricConfig) -> Result<Vec<OverlapSummary>> {
    let sample = select_sample(docs.len(), mcfg.lipschitz_docs, mcfg.seed, "lipschitz-sample");
    let mut out = Vec::new();
    for truth in pairs.iter().filter(|p| p.method == Method::Truth) {
        for sur in pairs
            .iter()
            .filter(|p| p.model_id == truth.model_id && matches!(p.method, Method::Lime | Method::Shap))
        {
            let mut overlaps = Vec::new();
            let mut corrs = Vec::new();
            for &d in &sample {
                let doc = &docs[d];
                let seed = attribution_seed(mcfg.seed, &doc.id);
                let (Ok(t), Ok(s)) = (truth.attribute(&doc.tokens, seed, mcfg), sur.attribute(&doc.tokens, seed, mcfg)) else {
                    continue;
                };
                let r = overlap_report(&t, &s, OVERLAP_TOP_K)?;
                overlaps.push(r.overlap as f64);
                corrs.extend(r.rank_correlation);
            }
            let n = overlaps.len();
            out.push(OverlapSummary {
                model_id: truth.model_id.clone(),
                surrogate: sur.method,
                top_k: OVERLAP_TOP_K,
                n_docs: n,
                mean_overlap: if n > 0 { overlaps.iter().sum::<f64>() / n as f64 } else { 0.0 },
                mean_rank_correlation: (!corrs.is_empty()).then(|| corrs.iter().sum::<f64>() / corrs.len() as f64),
            });
        }
    }
    Ok(out)
}

/// Evaluates every configured (model, method) pair on the test corpus and
/// writes JSON/CSV/SVG exports under `out/evaluation`.
pub fn run_evaluate(cfg: &RunConfig, out: &Path) -> Result<EvaluateSummary> {
    let tfidf: TfidfModel = read_json(&out.join("text_model.json"))
        .map_err(|e| Error::Config(format!("text model missing, run train first ({e})")))?;
    let table: EmbeddingTable = read_json(&out.join("embeddings.json"))
        .map_err(|e| Error::Config(format!("embeddings missing, run train first ({e})")))?;
    let test = read_corpus(&cfg.test, "test")?;
    let mcfg = cfg.metric_config();
    let index = build_neighbor_index(&table, mcfg.k)?;

    let mut loaded: Vec<(String, Loaded)> = Vec::new();
    for a in &cfg.attributions {
        if loaded.iter().any(|(id, _)| id == &a.model) {
            continue;
        }
        let spec = cfg.models.iter().find(|m| m.id == a.model).expect("validated");
        let model = if spec.kind == ModelKind::External {
            let m = ExternalModel::connect(spec.command.clone(), tfidf.dim(), RunConfig::timeout(spec))?;
            if m.representation() != RepresentationKind::SparseVector {
                return Err(Error::Config(format!(
                    "external model {} serves token sequences; surrogate attributions need sparse vectors",
                    spec.id
                )));
            }
            Loaded::External(m)
        } else {
            let path = out.join("models").join(format!("{}.json", spec.id));
            Loaded::Builtin(
                read_json(&path).map_err(|e| Error::Config(format!("model {} artifact missing, run train first ({e})", spec.id)))?,
            )
        };
        loaded.push((a.model.clone(), model));
    }
    let mut pairs = Vec::new();
    for a in &cfg.attributions {
        let (_, model) = loaded.iter().find(|(id, _)| id == &a.model).expect("loaded above");
        let suite_model = match model {
            Loaded::Builtin(m) => SuiteModel::from_builtin(m, &tfidf),
            Loaded::External(m) => SuiteModel::Vector {
                model: m,
                tfidf: &tfidf,
                truth: None,
            },
        };
        for &method in &a.methods {
            pairs.push(SuitePair {
                model_id: a.model.clone(),
                method,
                model: suite_model,
            });
        }
    }
    let runs = evaluate_suite(&pairs, &test, &table, &index, &mcfg)?;
    let overlap = overlap_summaries(&pairs, &test, &mcfg)?;
    let dir = out.join("evaluation");
    let mut exports = write_exports(&runs, &dir)?;
    let overlap_path = dir.join("overlap.json");
    write_json(&overlap_path, &overlap)?;
    exports.push(overlap_path);
    Ok(EvaluateSummary { runs, overlap, exports })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierReport {
    pub points: Vec<CandidatePoint>,
    pub pareto: ParetoResult,
    pub ranking: Ranking,
}

impl FrontierReport {
    pub fn text(&self) -> String {
        let mut out = frontier_table(&self.points, &self.pareto);
        out.push_str("\nweighted ranking\n");
        if self.ranking.is_empty() {
            out.push_str("  no candidate satisfies the constraints\n");
        }
        for r in &self.ranking.ranked {
            let _ = writeln!(out, "  {:>2}. {:<40} {:.4}", r.rank, r.point.label(), r.score);
        }
        for e in &self.ranking.excluded {
            let _ = writeln!(out, "  excluded {}: {}", e.point.label(), e.reason);
        }
        out
    }
}

/// Median Lipschitz and infidelity per pair joined with the model's AUC.
pub fn candidate_points(train: &TrainSummary, runs: &[EvaluationRun]) -> Result<Vec<CandidatePoint>> {
    let mut points = Vec::new();
    let mut missing = Vec::new();
    for r in runs {
        let auc = train.models.iter().find(|m| m.id == r.model_id).and_then(|m| m.auc);
        let mut lacks = Vec::new();
        if auc.is_none() {
            lacks.push("auc");
        }
        if r.infidelity_summary.is_none() {
            lacks.push("infidelity");
        }
        if r.lipschitz_summary.is_none() {
            lacks.push("lipschitz");
        }
        if !lacks.is_empty() {
            missing.push(format!("{}/{} lacks {}", r.model_id, r.method.as_str(), lacks.join(", ")));
            continue;
        }
        points.push(CandidatePoint::new(
            &r.model_id,
            r.method.as_str(),
            auc.unwrap_or_default(),
            r.infidelity_summary.map(|s| s.median).unwrap_or_default(),
            r.lipschitz_summary.map(|s| s.median).unwrap_or_default(),
        ));
    }
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!("missing metrics: {}", missing.join("; "))));
    }
    Ok(points)
}

pub fn frontier_report(points: &[CandidatePoint], fcfg: &FrontierConfig) -> Result<FrontierReport> {
    let objectives: Vec<ObjectiveSpec> = fcfg.objectives.iter().map(|&o| ObjectiveSpec::natural(o)).collect();
    Ok(FrontierReport {
        points: points.to_vec(),
        pareto: pareto_frontier(points, &objectives)?,
        ranking: weighted_rank(points, &fcfg.weights, &fcfg.constraints)?,
    })
}

/// Writes `frontier.json`, `frontier.txt` and `frontier.svg` into `dir`.
pub fn write_frontier(report: &FrontierReport, quality: Objective, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        ("frontier.json", serde_json::to_string_pretty(report)? + "\n"),
        ("frontier.txt", report.text()),
        ("frontier.svg", frontier_svg(&report.points, &report.pareto, quality)),
    ];
    let mut out = Vec::new();
    for (name, content) in files {
        let p = dir.join(name);
        fs::write(&p, content)?;
        out.push(p);
    }
    Ok(out)
}

/// Frontier from the `auc.json` and evaluation exports of a previous run.
pub fn run_frontier(cfg: &RunConfig, out: &Path) -> Result<FrontierReport> {
    let train: TrainSummary = read_json(&out.join("auc.json"))?;
    let runs: Vec<EvaluationRun> = read_json(&out.join("evaluation").join("evaluation.json"))?;
    let points = candidate_points(&train, &runs)?;
    let report = frontier_report(&points, &cfg.frontier)?;
    write_frontier(&report, cfg.frontier.quality, &out.join("frontier"))?;
    Ok(report)
}

/// `n` perturbations of one document as TSV lines:
/// `draw<TAB>replaced positions (comma separated)<TAB>tokens`.
pub fn run_perturb(cfg: &RunConfig, out: &Path, doc_id: &str, n: usize) -> Result<String> {
    let (train, test) = read_corpora(cfg)?;
    let doc = train
        .iter()
        .chain(&test)
        .find(|d| d.id == doc_id)
        .ok_or_else(|| Error::InvalidInput(format!("unknown document id {doc_id}")))?;
    let saved = out.join("embeddings.json");
    let table: EmbeddingTable = if saved.is_file() {
        read_json(&saved)?
    } else {
        load_or_train_embeddings(cfg, &train)?
    };
    let mcfg = cfg.metric_config();
    let index = build_neighbor_index(&table, mcfg.k)?;
    let pcfg = mcfg.perturbation();
    let hood = make_neighborhood(doc, &table, &index, &pcfg, n)?;
    let mut tsv = String::new();
    for p in &hood {
        verify_perturbation(&doc.tokens, p, &table, &index, pcfg.k)?;
        let positions: Vec<String> = p.replaced_positions.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(tsv, "{}\t{}\t{}", p.draw, positions.join(","), p.tokens.join(" "));
    }
    Ok(tsv)
}

/// Result of handshaking an adapter and sending one probe prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterCheck {
    pub name: String,
    pub representation: RepresentationKind,
    pub probe_probability: f64,
}

pub fn adapter_check(command: &[String], dim: usize, timeout: Duration) -> Result<AdapterCheck> {
    let mut handle = crate::models::ExternalModelHandle::spawn(command, timeout)?;
    let representation = handle.representation();
    let sparse = crate::SparseVector::zeros(dim);
    let tokens = vec!["probe".to_string()];
    let input = match representation {
        RepresentationKind::SparseVector => Input::Sparse(&sparse),
        RepresentationKind::TokenSequence => Input::Tokens(&tokens),
    };
    let probe_probability = handle.predict(&[input])?[0];
    let name = handle.name().to_string();
    handle.close()?;
    Ok(AdapterCheck {
        name,
        representation,
        probe_probability,
    })
}
