//! Python bindings: `import xqual`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use xqual_core::attributions::{
    exact_shapley, kernel_shap, lime, truth_additive, truth_linear, Attribution as CoreAttribution, KernelShapConfig,
    LimeConfig, Scored,
};
use xqual_core::embeddings::{build_neighbor_index, train_embeddings, EmbeddingTable as CoreTable, NeighborIndex};
use xqual_core::metrics::{infidelity as core_infidelity, local_lipschitz as core_lipschitz, Repr};
use xqual_core::models::{
    train_additive, train_forest, train_logistic, AdditiveConfig, BuiltinModel, ForestConfig, LogisticConfig, Target,
};
use xqual_core::perturb::{make_neighborhood, GaussianNoiseConfig, PerturbationConfig, PerturbedDoc};
use xqual_core::text::{build_vocab, fit_tfidf, Document, TfidfModel as CoreTfidf, VocabConfig};
use xqual_core::tradeoff::{self, CandidatePoint, Objective, ObjectiveSpec};

fn py_err(e: xqual_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn target(name: &str) -> PyResult<Target> {
    match name {
        "logit" => Ok(Target::Logit),
        "probability" => Ok(Target::Probability),
        other => Err(PyValueError::new_err(format!("unknown target {other:?}"))),
    }
}

fn documents(texts: &[String]) -> PyResult<Vec<Document>> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| Document::new(format!("doc-{i}"), 0, t).map_err(py_err))
        .collect()
}

#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    xqual_core::text::tokenize(text)
}

#[pyclass(module = "xqual", from_py_object)]
#[derive(Clone)]
struct SparseVector {
    inner: xqual_core::SparseVector,
}

#[pymethods]
impl SparseVector {
    #[new]
    fn new(dense: Vec<f64>) -> Self {
        Self {
            inner: xqual_core::SparseVector::from_dense(&dense),
        }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn indices(&self) -> Vec<usize> {
        self.inner.indices().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn to_dense(&self) -> Vec<f64> {
        self.inner.to_dense()
    }

    fn __repr__(&self) -> String {
        format!("SparseVector(dim={}, nnz={})", self.inner.dim(), self.inner.nnz())
    }
}

#[pyclass(module = "xqual")]
struct TfidfModel {
    inner: CoreTfidf,
}

#[pymethods]
impl TfidfModel {
    /// Builds the vocabulary and idf weights from raw texts.
    #[staticmethod]
    #[pyo3(signature = (texts, min_df = 1, ngram_max = 1))]
    fn fit(texts: Vec<String>, min_df: usize, ngram_max: usize) -> PyResult<Self> {
        let docs = documents(&texts)?;
        let cfg = VocabConfig {
            min_df,
            ngram_max,
            ..VocabConfig::default()
        };
        let vocab = build_vocab(&docs, &cfg).map_err(py_err)?;
        Ok(Self {
            inner: fit_tfidf(&docs, vocab).map_err(py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn feature_name(&self, index: usize) -> PyResult<String> {
        if index >= self.inner.dim() {
            return Err(PyValueError::new_err(format!("feature {index} out of range")));
        }
        Ok(self.inner.vocabulary.token(index).to_string())
    }

    fn transform(&self, text: &str) -> SparseVector {
        SparseVector {
            inner: self.inner.transform(&xqual_core::text::tokenize(text)),
        }
    }

    fn transform_tokens(&self, tokens: Vec<String>) -> SparseVector {
        SparseVector {
            inner: self.inner.transform(&tokens),
        }
    }
}

#[pyclass(module = "xqual")]
struct Attribution {
    inner: CoreAttribution,
}

#[pymethods]
impl Attribution {
    #[getter]
    fn scores(&self) -> Vec<f64> {
        self.inner.scores.clone()
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn target(&self) -> &'static str {
        self.inner.target.as_str()
    }

    /// Metadata as a JSON string.
    fn metadata_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.metadata).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

fn training_data(xs: &[SparseVector]) -> Vec<xqual_core::SparseVector> {
    xs.iter().map(|x| x.inner.clone()).collect()
}

/// A trained TF-IDF classifier: linear, additive or forest.
#[pyclass(module = "xqual")]
struct Model {
    inner: BuiltinModel,
}

impl Model {
    fn scored(&self, target: Target) -> Scored<'_> {
        Scored {
            model: self.inner.as_vector_model().expect("vector models only"),
            target,
        }
    }
}

#[pymethods]
impl Model {
    #[staticmethod]
    #[pyo3(signature = (xs, labels, lr = 1.0, epochs = 20, l2 = 1e-4, seed = 0))]
    fn train_linear(xs: Vec<SparseVector>, labels: Vec<u8>, lr: f64, epochs: usize, l2: f64, seed: u64) -> PyResult<Self> {
        let cfg = LogisticConfig {
            lr,
            epochs,
            l2,
            seed,
            ..LogisticConfig::default()
        };
        let (m, _) = train_logistic(&training_data(&xs), &labels, &cfg).map_err(py_err)?;
        Ok(Self {
            inner: BuiltinModel::Linear(m),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (xs, labels, n_bins = 256, rounds = 500, lr = 0.1))]
    fn train_additive(xs: Vec<SparseVector>, labels: Vec<u8>, n_bins: usize, rounds: usize, lr: f64) -> PyResult<Self> {
        let cfg = AdditiveConfig { n_bins, rounds, lr };
        let (m, _) = train_additive(&training_data(&xs), &labels, &cfg).map_err(py_err)?;
        Ok(Self {
            inner: BuiltinModel::Additive(m),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (xs, labels, n_trees = 100, max_depth = 12, seed = 0))]
    fn train_forest(xs: Vec<SparseVector>, labels: Vec<u8>, n_trees: usize, max_depth: usize, seed: u64) -> PyResult<Self> {
        let cfg = ForestConfig {
            n_trees,
            max_depth,
            seed,
            ..ForestConfig::default()
        };
        let m = train_forest(&training_data(&xs), &labels, &cfg).map_err(py_err)?;
        Ok(Self {
            inner: BuiltinModel::Forest(m),
        })
    }

    /// Loads a model file written by `xqual train`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: BuiltinModel = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        if inner.as_vector_model().is_none() {
            return Err(PyValueError::new_err("only TF-IDF models are exposed to Python"));
        }
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    fn proba(&self, x: &SparseVector) -> PyResult<f64> {
        self.scored(Target::Probability).model.proba(&x.inner).map_err(py_err)
    }

    fn logit(&self, x: &SparseVector) -> PyResult<f64> {
        self.scored(Target::Logit).model.logit(&x.inner).map_err(py_err)
    }

    /// Exact attribution for linear and additive models.
    fn truth(&self, x: &SparseVector) -> PyResult<Attribution> {
        let a = match &self.inner {
            BuiltinModel::Linear(m) => truth_linear(m, &x.inner),
            BuiltinModel::Additive(m) => truth_additive(m, &x.inner),
            other => {
                return Err(PyValueError::new_err(format!("no truth attribution for a {} model", other.kind_name())))
            }
        };
        Ok(Attribution {
            inner: a.map_err(py_err)?,
        })
    }

    #[pyo3(signature = (x, n_samples = 500, kernel_width = 0.75, n_report_features = 10, seed = 0, target = "logit"))]
    fn lime(
        &self,
        x: &SparseVector,
        n_samples: usize,
        kernel_width: f64,
        n_report_features: usize,
        seed: u64,
        target: &str,
    ) -> PyResult<Attribution> {
        let cfg = LimeConfig {
            n_samples,
            kernel_width,
            n_report_features,
            seed,
        };
        let scored = self.scored(self::target(target)?);
        Ok(Attribution {
            inner: lime(&scored, &x.inner, &cfg).map_err(py_err)?,
        })
    }

    #[pyo3(signature = (x, n_samples = 512, seed = 0, background = None, target = "logit"))]
    fn kernel_shap(
        &self,
        x: &SparseVector,
        n_samples: usize,
        seed: u64,
        background: Option<&SparseVector>,
        target: &str,
    ) -> PyResult<Attribution> {
        let scored = self.scored(self::target(target)?);
        let cfg = KernelShapConfig { n_samples, seed };
        Ok(Attribution {
            inner: kernel_shap(&scored, &x.inner, background.map(|b| &b.inner), &cfg).map_err(py_err)?,
        })
    }

    #[pyo3(signature = (x, background = None, target = "logit"))]
    fn exact_shapley(&self, x: &SparseVector, background: Option<&SparseVector>, target: &str) -> PyResult<Attribution> {
        let scored = self.scored(self::target(target)?);
        Ok(Attribution {
            inner: exact_shapley(&scored, &x.inner, background.map(|b| &b.inner)).map_err(py_err)?,
        })
    }

    /// Infidelity of `attribution` at `x` with per-feature noise scale `std`.
    /// Returns `(value, std_error)`.
    #[pyo3(signature = (attribution, x, std, sigma_scale = 0.1, n_draws = 50, seed = 0, full_support = false))]
    #[allow(clippy::too_many_arguments)]
    fn infidelity(
        &self,
        attribution: &Attribution,
        x: &SparseVector,
        std: Vec<f64>,
        sigma_scale: f64,
        n_draws: usize,
        seed: u64,
        full_support: bool,
    ) -> PyResult<(f64, f64)> {
        let cfg = GaussianNoiseConfig {
            sigma_scale,
            seed,
            n_draws,
            full_support,
        };
        let scored = self.scored(attribution.inner.target);
        let r = core_infidelity("x", &scored, &attribution.inner, &x.inner, &std, &cfg).map_err(py_err)?;
        Ok((r.value, r.std_error))
    }
}

/// Word vectors plus their nearest-neighbor index.
#[pyclass(module = "xqual")]
struct EmbeddingTable {
    table: CoreTable,
    index: NeighborIndex,
}

#[pymethods]
impl EmbeddingTable {
    #[staticmethod]
    #[pyo3(signature = (texts, dim = 32, window = 4, k = 10))]
    fn train(texts: Vec<String>, dim: usize, window: usize, k: usize) -> PyResult<Self> {
        let docs = documents(&texts)?;
        let table = train_embeddings(&docs, dim, window).map_err(py_err)?;
        let index = build_neighbor_index(&table, k).map_err(py_err)?;
        Ok(Self { table, index })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn __len__(&self) -> usize {
        self.table.len()
    }

    fn neighbors(&self, token: &str) -> PyResult<Vec<String>> {
        let i = self
            .table
            .index_of(token)
            .ok_or_else(|| PyValueError::new_err(format!("{token:?} is not in the table")))?;
        Ok(self.index.neighbors(i).iter().map(|&j| self.table.tokens()[j].clone()).collect())
    }

    /// `m` perturbations of a token sequence: list of (tokens, replaced positions).
    #[pyo3(signature = (tokens, m = 15, pi = 0.1, k = 10, seed = 0, doc_id = "doc"))]
    fn perturb(
        &self,
        tokens: Vec<String>,
        m: usize,
        pi: f64,
        k: usize,
        seed: u64,
        doc_id: &str,
    ) -> PyResult<Vec<(Vec<String>, Vec<usize>)>> {
        let hood = self.neighborhood(tokens, m, pi, k, seed, doc_id)?;
        Ok(hood.into_iter().map(|p| (p.tokens, p.replaced_positions)).collect())
    }

    /// Local Lipschitz estimate of `attribute(tokens) -> list[float]` over a
    /// perturbation neighborhood, distances taken in `tfidf` space. `None`
    /// when no draw falls within `eps`.
    #[pyo3(signature = (attribute, tfidf, tokens, m = 15, pi = 0.1, k = 10, eps = 0.25, seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn local_lipschitz(
        &self,
        py: Python<'_>,
        attribute: Py<PyAny>,
        tfidf: &TfidfModel,
        tokens: Vec<String>,
        m: usize,
        pi: f64,
        k: usize,
        eps: f64,
        seed: u64,
    ) -> PyResult<Option<f64>> {
        let hood = self.neighborhood(tokens.clone(), m, pi, k, seed, "doc")?;
        let attrib = |t: &[String]| -> xqual_core::Result<Vec<f64>> {
            attribute
                .call1(py, (t.to_vec(),))
                .and_then(|v| v.extract::<Vec<f64>>(py))
                .map_err(|e| xqual_core::Error::InvalidInput(format!("attribution callback failed: {e}")))
        };
        let repr = |t: &[String]| Repr::Sparse(tfidf.inner.transform(t));
        let r = core_lipschitz("doc", &attrib, &repr, &tokens, &hood, eps).map_err(py_err)?;
        Ok(r.value)
    }
}

impl EmbeddingTable {
    fn neighborhood(&self, tokens: Vec<String>, m: usize, pi: f64, k: usize, seed: u64, doc_id: &str) -> PyResult<Vec<PerturbedDoc>> {
        let doc = Document::from_tokens(doc_id, 0, tokens).map_err(py_err)?;
        let cfg = PerturbationConfig {
            pi,
            k,
            seed,
            ..PerturbationConfig::default()
        };
        make_neighborhood(&doc, &self.table, &self.index, &cfg, m).map_err(py_err)
    }
}

#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<u8>) -> PyResult<f64> {
    tradeoff::auc(&scores, &labels).map_err(py_err)
}

fn objective(name: &str) -> PyResult<Objective> {
    match name {
        "auc" => Ok(Objective::Auc),
        "infidelity" => Ok(Objective::Infidelity),
        "lipschitz" => Ok(Objective::Lipschitz),
        other => Err(PyValueError::new_err(format!("unknown objective {other:?}"))),
    }
}

/// Pareto frontier of `(model_id, method, auc, infidelity, lipschitz)` rows.
/// Returns a dict with `optimal` labels and `dominated` as {label: witness}.
#[pyfunction]
#[pyo3(signature = (points, objectives = vec!["auc".to_string(), "infidelity".to_string()]))]
fn pareto_frontier<'py>(
    py: Python<'py>,
    points: Vec<(String, String, f64, f64, f64)>,
    objectives: Vec<String>,
) -> PyResult<Bound<'py, PyDict>> {
    let pts: Vec<CandidatePoint> = points
        .iter()
        .map(|(m, meth, a, i, l)| CandidatePoint::new(m, meth, *a, *i, *l))
        .collect();
    let specs = objectives
        .iter()
        .map(|o| objective(o).map(ObjectiveSpec::natural))
        .collect::<PyResult<Vec<_>>>()?;
    let result = tradeoff::pareto_frontier(&pts, &specs).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("optimal", result.optimal.iter().map(CandidatePoint::label).collect::<Vec<_>>())?;
    let dominated = PyDict::new(py);
    for d in &result.dominated {
        dominated.set_item(d.point.label(), d.witness.label())?;
    }
    out.set_item("dominated", dominated)?;
    Ok(out)
}

#[pymodule]
fn xqual(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(pareto_frontier, m)?)?;
    m.add_class::<SparseVector>()?;
    m.add_class::<TfidfModel>()?;
    m.add_class::<Attribution>()?;
    m.add_class::<Model>()?;
    m.add_class::<EmbeddingTable>()?;
    Ok(())
}
