//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any gating criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use xqual_core::attributions::{
    exact_shapley, integrated_gradients, kernel_shap, truth_linear, Attribution, KernelShapConfig, Method, ModelFn,
    Scored, UnitKind,
};
use xqual_core::embeddings::{build_neighbor_index, train_embeddings, EmbeddingTable, NeighborIndex};
use xqual_core::metrics::{infidelity, local_lipschitz, Repr};
use xqual_core::models::{AdditiveModel, EmbeddingClassifier, LinearModel, ShapeFunction, Target, VectorModel};
use xqual_core::perturb::{make_neighborhood, verify_perturbation, GaussianNoiseConfig, PerturbationConfig};
use xqual_core::synth::{synthetic_corpus, SynthConfig};
use xqual_core::text::{build_vocab, fit_tfidf, Document, VocabConfig};
use xqual_core::tradeoff::{auc, pareto_frontier, CandidatePoint, Objective, ObjectiveSpec};
use xqual_core::SparseVector;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

struct Corpus {
    docs: Vec<Document>,
    table: EmbeddingTable,
    index: NeighborIndex,
}

fn corpus(n_docs: usize) -> Result<Corpus, String> {
    let cfg = SynthConfig {
        n_docs,
        seed: 21,
        ..SynthConfig::default()
    };
    let docs = synthetic_corpus(&cfg)
        .map_err(err)?
        .into_iter()
        .enumerate()
        .map(|(i, (label, text))| Document::new(format!("d{i}"), label, &text))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let table = train_embeddings(&docs, 32, 4).map_err(err)?;
    let index = build_neighbor_index(&table, 10).map_err(err)?;
    Ok(Corpus { docs, table, index })
}

fn algorithm1() -> Outcome {
    let start = Instant::now();
    let c = corpus(120)?;
    let cfg = PerturbationConfig {
        pi: 0.1,
        k: 10,
        seed: 5,
        ..PerturbationConfig::default()
    };
    let (mut tokens, mut replaced, mut unindexed) = (0usize, 0usize, 0usize);
    for doc in &c.docs {
        for p in make_neighborhood(doc, &c.table, &c.index, &cfg, 1).map_err(err)? {
            verify_perturbation(&doc.tokens, &p, &c.table, &c.index, cfg.k).map_err(err)?;
            for &pos in &p.replaced_positions {
                let src = c.table.index_of(&doc.tokens[pos]).ok_or("replaced an out-of-table token")?;
                let new = c.table.index_of(&p.tokens[pos]).ok_or("replacement outside the table")?;
                ensure(c.index.neighbors(src)[..cfg.k].contains(&new), || {
                    format!("{} -> {} not among the k nearest neighbors", doc.tokens[pos], p.tokens[pos])
                })?;
            }
            tokens += doc.tokens.len();
            replaced += p.replaced_positions.len();
            unindexed += p.out_of_index;
        }
    }
    ensure(tokens >= 10_000, || format!("only {tokens} token draws"))?;
    let frac = replaced as f64 / tokens as f64;
    ensure((0.08..=0.12).contains(&frac), || format!("replaced fraction {frac:.4}"))?;

    let zero = PerturbationConfig { pi: 0.0, ..cfg.clone() };
    for doc in c.docs.iter().take(20) {
        for p in make_neighborhood(doc, &c.table, &c.index, &zero, 5).map_err(err)? {
            ensure(p.tokens == doc.tokens && p.replaced_positions.is_empty(), || "pi = 0 changed a document".into())?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{tokens} token draws, replaced fraction {frac:.4}, {unindexed} out-of-index, {secs:.2}s"
    ))
}

fn lipschitz_homogeneity() -> Outcome {
    let c = corpus(60)?;
    let vocab = build_vocab(&c.docs, &VocabConfig::default()).map_err(err)?;
    let tfidf = fit_tfidf(&c.docs, vocab).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w: Vec<f64> = (0..tfidf.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
    let model = LinearModel::new(w, 0.3).map_err(err)?;
    let attrib = |t: &[String]| truth_linear(&model, &tfidf.transform(t)).map(|a| a.scores);
    let scaled = |t: &[String]| attrib(t).map(|s| s.into_iter().map(|v| 3.7 * v).collect());
    let constant = |_: &[String]| Ok(vec![1.25; tfidf.dim()]);
    let repr = |t: &[String]| Repr::Sparse(tfidf.transform(t));
    let cfg = PerturbationConfig {
        pi: 0.1,
        k: 10,
        seed: 17,
        ..PerturbationConfig::default()
    };
    let (mut checked, mut worst) = (0usize, 0.0f64);
    for doc in &c.docs {
        let hood = make_neighborhood(doc, &c.table, &c.index, &cfg, 15).map_err(err)?;
        let base = local_lipschitz(&doc.id, &attrib, &repr, &doc.tokens, &hood, 0.25).map_err(err)?;
        let up = local_lipschitz(&doc.id, &scaled, &repr, &doc.tokens, &hood, 0.25).map_err(err)?;
        let flat = local_lipschitz(&doc.id, &constant, &repr, &doc.tokens, &hood, 0.25).map_err(err)?;
        ensure(base.n_retained == up.n_retained, || "retained draws differ under scaling".into())?;
        match (base.value, up.value) {
            (Some(a), Some(b)) => {
                let rel = (b - 3.7 * a).abs() / (3.7 * a).abs().max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                ensure(rel <= 1e-9, || format!("{}: {b} vs 3.7 x {a}", doc.id))?;
                ensure(flat.value == Some(0.0), || format!("constant attribution gave {:?}", flat.value))?;
                checked += 1;
            }
            (None, None) => ensure(flat.value.is_none(), || "empty neighborhood disagreement".into())?,
            _ => return Err("scaling changed neighborhood emptiness".into()),
        }
    }
    ensure(checked >= 30, || format!("only {checked} non-empty neighborhoods"))?;
    Ok(format!("{checked} documents, worst relative error {worst:.2e}, constant attribution 0"))
}

fn sparse_random(rng: &mut ChaCha8Rng, dim: usize, density: f64) -> SparseVector {
    let dense: Vec<f64> = (0..dim)
        .map(|_| if rng.random::<f64>() < density { rng.random_range(-3.0..3.0) } else { 0.0 })
        .collect();
    SparseVector::from_dense(&dense)
}

fn attribution(scores: Vec<f64>) -> Attribution {
    Attribution {
        unit_kind: UnitKind::Feature,
        scores,
        method: Method::Saliency,
        model_id: "linear".into(),
        target: Target::Logit,
        metadata: BTreeMap::new(),
    }
}

fn infidelity_zero_and_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst = 0.0f64;
    for fixture in 0..100 {
        let dim = rng.random_range(2..40);
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b = rng.random_range(-1.0..1.0);
        let x = sparse_random(&mut rng, dim, 0.5);
        let std: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..2.0)).collect();
        let noise = GaussianNoiseConfig {
            sigma_scale: rng.random_range(0.01..1.0),
            seed: fixture,
            n_draws: 50,
            full_support: rng.random_bool(0.5),
        };
        let f = |v: &SparseVector| b + v.dot_dense(&w);
        let r = infidelity("fx", &f, &attribution(w.clone()), &x, &std, &noise).map_err(err)?;
        worst = worst.max(r.value);
        ensure(r.value <= 1e-12, || format!("fixture {fixture}: infidelity {}", r.value))?;
    }

    let w = [1.3, -0.7];
    let xs = [0.4, 2.5];
    let std = [0.8, 1.5];
    let sigma_scale = 0.5;
    let f = |v: &SparseVector| 0.2 + v.dot_dense(&w);
    let x = SparseVector::from_dense(&xs);
    let phi: Vec<f64> = (0..2).map(|i| w[i] * xs[i]).collect();
    let noise = GaussianNoiseConfig {
        sigma_scale,
        seed: 77,
        n_draws: 10_000,
        full_support: false,
    };
    let r = infidelity("two", &f, &attribution(phi), &x, &std, &noise).map_err(err)?;
    let expected: f64 = (0..2)
        .map(|i| (sigma_scale * std[i]).powi(2) * w[i].powi(2) * (xs[i] - 1.0).powi(2))
        .sum();
    let z = (r.value - expected).abs() / r.std_error;
    ensure(z <= 3.0, || format!("MC {} vs closed form {expected} ({z:.2} SE)", r.value))?;
    Ok(format!(
        "100 fixtures max {worst:.1e}; oracle {expected:.6} vs {:.6} ({z:.2} SE)",
        r.value
    ))
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_additive(rng: &mut ChaCha8Rng, dim: usize, dummy: usize) -> Result<AdditiveModel, String> {
    let shapes = (0..dim)
        .map(|j| {
            let n_edges = rng.random_range(1..6);
            let mut edges: Vec<f64> = (0..n_edges).map(|_| rng.random_range(-3.0..3.0)).collect();
            edges.sort_by(f64::total_cmp);
            edges.dedup();
            let scores = (0..=edges.len())
                .map(|_| if j == dummy { 0.0 } else { rng.random_range(-1.5..1.5) })
                .collect();
            ShapeFunction { edges, scores }
        })
        .collect();
    AdditiveModel::new(shapes, rng.random_range(-1.0..1.0)).map_err(err)
}

fn check_shapley(model: &dyn ModelFn, x: &SparseVector, dummy: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64), String> {
    let exact = exact_shapley(model, x, None).map_err(err)?;
    let full = kernel_shap(model, x, None, &KernelShapConfig { n_samples: 4096, seed: 1 }).map_err(err)?;
    let sampled = kernel_shap(
        model,
        x,
        None,
        &KernelShapConfig {
            n_samples: 40,
            seed: rng.random(),
        },
    )
    .map_err(err)?;
    let delta = model.eval(x).map_err(err)? - model.eval(&SparseVector::zeros(x.dim())).map_err(err)?;
    let d = linf(&exact.scores, &full.scores);
    ensure(d <= 1e-8, || format!("kernel vs exact L-inf {d:e}"))?;
    let mut eff = 0.0f64;
    for a in [&exact, &full, &sampled] {
        let e = (a.scores.iter().sum::<f64>() - delta).abs();
        eff = eff.max(e);
        ensure(e <= 1e-10, || format!("efficiency residual {e:e}"))?;
    }
    ensure(exact.scores[dummy] == 0.0, || format!("exact dummy score {}", exact.scores[dummy]))?;
    ensure(full.scores[dummy].abs() <= 1e-10, || format!("kernel dummy score {}", full.scores[dummy]))?;
    Ok((d, eff))
}

fn shapley_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let (mut worst_d, mut worst_eff, mut n) = (0.0f64, 0.0f64, 0);
    for _ in 0..15 {
        let dim = 16;
        let active = rng.random_range(3..=12);
        let mut x = vec![0.0; dim];
        for v in x.iter_mut().take(active) {
            *v = rng.random_range(0.2..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let dummy = rng.random_range(0..active);
        let x = SparseVector::from_dense(&x);

        let mut w: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        w[dummy] = 0.0;
        let lin = LinearModel::new(w, 0.1).map_err(err)?;
        for target in [Target::Logit, Target::Probability] {
            let (d, e) = check_shapley(&Scored { model: &lin, target }, &x, dummy, &mut rng)?;
            worst_d = worst_d.max(d);
            worst_eff = worst_eff.max(e);
            n += 1;
        }
        let add = random_additive(&mut rng, dim, dummy)?;
        let (d, e) = check_shapley(
            &Scored {
                model: &add as &dyn VectorModel,
                target: Target::Logit,
            },
            &x,
            dummy,
            &mut rng,
        )?;
        worst_d = worst_d.max(d);
        worst_eff = worst_eff.max(e);
        n += 1;
    }
    Ok(format!(
        "{n} fixtures, kernel vs exact L-inf {worst_d:.1e}, efficiency {worst_eff:.1e}, dummies 0"
    ))
}

fn ig_completeness() -> Outcome {
    let c = corpus(40)?;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let w: Vec<f64> = (0..c.table.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
    let model = EmbeddingClassifier::new(c.table.clone(), w, -0.4).map_err(err)?;
    let mut worst = 0.0f64;
    for doc in c.docs.iter().take(20) {
        for steps in [8, 16, 32, 64] {
            let a = integrated_gradients(&model, &doc.tokens, None, steps, Target::Logit).map_err(err)?;
            let residual = a.metadata["completeness_residual"].as_f64().ok_or("no residual recorded")?;
            let recomputed = (a.scores.iter().sum::<f64>() - (model.logit(&doc.tokens) - model.bias)).abs();
            worst = worst.max(residual).max(recomputed);
            ensure(residual <= 1e-6 && recomputed <= 1e-6, || {
                format!("{} steps {steps}: residual {residual:e}", doc.id)
            })?;
        }
    }

    let dim = model.dim();
    let mut worst_fd = 0.0f64;
    for doc in c.docs.iter().take(5) {
        let tokens = &doc.tokens[..doc.tokens.len().min(12)];
        let grad: Vec<f64> = model.gradient_wrt_embeddings(tokens).map_err(err)?.concat();
        let matrix = model.embed(tokens);
        let h = 1e-5;
        for e in 0..matrix.len() {
            let mut plus = matrix.clone();
            let mut minus = matrix.clone();
            plus[e] += h;
            minus[e] -= h;
            let fd = (model.logit_from_matrix(&plus) - model.logit_from_matrix(&minus)) / (2.0 * h);
            let rel = (grad[e] - fd).abs() / fd.abs().max(1e-8);
            worst_fd = worst_fd.max(rel);
            ensure(rel <= 1e-5, || format!("entry {e} (dim {dim}): analytic {} vs fd {fd}", grad[e]))?;
        }
    }
    Ok(format!("max residual {worst:.1e}; finite differences max rel {worst_fd:.1e}"))
}

fn table2() -> Result<Vec<CandidatePoint>, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/table2.json");
    serde_json::from_str(&fs::read_to_string(path).map_err(err)?).map_err(err)
}

fn pareto_table2() -> Outcome {
    let points = table2()?;
    ensure(points.len() == 9, || "fixture must hold nine rows".into())?;
    let objectives = [ObjectiveSpec::natural(Objective::Auc), ObjectiveSpec::natural(Objective::Infidelity)];
    let result = pareto_frontier(&points, &objectives).map_err(err)?;

    // brute-force dominance enumeration
    let dominated_by = |p: &CandidatePoint, q: &CandidatePoint| {
        q.auc >= p.auc && q.infidelity <= p.infidelity && (q.auc > p.auc || q.infidelity < p.infidelity)
    };
    let mut oracle: Vec<String> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominated_by(p, q)))
        .map(CandidatePoint::label)
        .collect();
    oracle.sort();
    let mut got: Vec<String> = result.optimal.iter().map(CandidatePoint::label).collect();
    got.sort();
    ensure(got == oracle, || format!("frontier {got:?} vs enumeration {oracle:?}"))?;
    ensure(got == ["BigBird IG", "LR SHAP", "RF SHAP"], || format!("frontier {got:?}"))?;
    let lr_truth = result
        .dominated
        .iter()
        .find(|d| d.point.label() == "LR Truth")
        .ok_or("LR Truth not dominated")?;
    ensure(lr_truth.witness.label() == "LR SHAP", || {
        format!("LR Truth witness {}", lr_truth.witness.label())
    })?;
    for d in &result.dominated {
        ensure(dominated_by(&d.point, &d.witness), || format!("bad witness for {}", d.point.label()))?;
    }
    Ok(format!("frontier {got:?}, LR Truth witnessed by LR SHAP"))
}

fn auc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for fixture in 0..200 {
        let n = rng.random_range(2..120);
        let levels = rng.random_range(2..20);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.37).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let mut twice_wins = 0u64;
        let (mut p, mut q) = (0u64, 0u64);
        for i in 0..n {
            if labels[i] == 1 {
                p += 1;
            } else {
                q += 1;
            }
            for j in 0..n {
                if labels[i] == 1 && labels[j] == 0 {
                    twice_wins += if scores[i] > scores[j] {
                        2
                    } else if scores[i] == scores[j] {
                        1
                    } else {
                        0
                    };
                }
            }
        }
        let expected = twice_wins as f64 / (2 * p * q) as f64;
        let got = auc(&scores, &labels).map_err(err)?;
        ensure(got == expected, || format!("fixture {fixture}: {got} vs {expected}"))?;
    }
    let labels = [0, 0, 1, 1, 0, 1];
    let separated = auc(&[0.1, 0.2, 0.8, 0.9, 0.3, 0.7], &labels).map_err(err)?;
    ensure(separated == 1.0, || format!("perfect separation gave {separated}"))?;
    let ties = auc(&[0.5; 6], &labels).map_err(err)?;
    ensure(ties == 0.5, || format!("all ties gave {ties}"))?;
    Ok("200 fixtures exact; separation 1.0; ties 0.5".into())
}

struct PipelineRun {
    csv: Vec<u8>,
    auc: Vec<u8>,
    overlap: Value,
    secs: f64,
}

fn xqual(args: &[&str], cwd: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_xqual"))
        .args(args)
        .current_dir(cwd)
        .env_remove("XQUAL_OUT_DIR")
        .output()
        .map_err(err)?;
    ensure(o.status.success(), || {
        format!("xqual {} failed: {}", args.join(" "), String::from_utf8_lossy(&o.stderr))
    })
}

fn pipeline(dir: &Path, out: &str, workers: &str) -> Result<PipelineRun, String> {
    let start = Instant::now();
    for cmd in ["train", "evaluate"] {
        xqual(&["--workers", workers, "--out", out, cmd, "--config", "config.json"], dir)?;
    }
    let secs = start.elapsed().as_secs_f64();
    let base = dir.join(out);
    Ok(PipelineRun {
        csv: fs::read(base.join("evaluation/evaluation.csv")).map_err(err)?,
        auc: fs::read(base.join("auc.json")).map_err(err)?,
        overlap: serde_json::from_slice(&fs::read(base.join("evaluation/overlap.json")).map_err(err)?).map_err(err)?,
        secs,
    })
}

fn end_to_end(dir: &Path) -> Result<(String, PipelineRun), String> {
    let start = Instant::now();
    xqual(&["--seed", "2024", "synth", "--dir", "data", "--n-docs", "2000"], dir)?;
    let config = json!({
        "train": "data/train.tsv",
        "test": "data/test.tsv",
        "seed": 2024,
        "models": [
            {"id": "lr", "kind": "linear"},
            {"id": "ebm", "kind": "additive"},
            {"id": "rf", "kind": "forest"},
            {"id": "emb", "kind": "embedding", "params": {"freeze_embeddings": false, "lr": 1.0, "epochs": 30}}
        ],
        "attributions": [
            {"model": "lr", "methods": ["truth", "lime", "shap"]},
            {"model": "ebm", "methods": ["truth", "lime", "shap"]},
            {"model": "rf", "methods": ["lime", "shap"]},
            {"model": "emb", "methods": ["saliency", "ig"]}
        ],
        "metrics": {"lipschitz_docs": 35, "m": 15, "infidelity_docs": 100}
    });
    fs::write(dir.join("config.json"), serde_json::to_string_pretty(&config).map_err(err)?).map_err(err)?;
    let first = pipeline(dir, "run1", "1")?;
    let second = pipeline(dir, "run2", "1")?;
    let wide = pipeline(dir, "run8", "8")?;
    ensure(first.csv == second.csv && first.auc == second.auc, || "two runs differ".into())?;
    ensure(first.csv == wide.csv && first.auc == wide.auc, || "--workers 1 and --workers 8 differ".into())?;
    let methods: std::collections::BTreeSet<String> = String::from_utf8_lossy(&first.csv)
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(1).map(str::to_string))
        .collect();
    ensure(methods.len() == 5, || format!("methods in export: {methods:?}"))?;
    let total = start.elapsed().as_secs_f64();
    ensure(first.secs < 600.0, || format!("pipeline took {:.0}s", first.secs))?;
    let msg = format!(
        "{} CSV bytes identical over 3 runs; pipeline {:.1}s (workers 1), {:.1}s (workers 8); {total:.1}s overall",
        first.csv.len(),
        first.secs,
        wide.secs
    );
    Ok((msg, first))
}

fn qualitative(run: &PipelineRun) -> String {
    let csv = String::from_utf8_lossy(&run.csv);
    let mut dists: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if let Ok(v) = f[4].parse::<f64>() {
            dists.entry((f[0].into(), f[1].into(), f[2].into())).or_default().push(v);
        }
    }
    let mut notes = Vec::new();
    let mut surrogate_ok = true;
    for model in ["lr", "rf"] {
        for method in ["lime", "shap"] {
            for metric in ["lipschitz", "infidelity"] {
                let key = (model.to_string(), method.to_string(), metric.to_string());
                let ok = dists
                    .get(&key)
                    .is_some_and(|v| !v.is_empty() && v.iter().all(|x| x.is_finite()) && v.iter().any(|&x| x != 0.0));
                if !ok {
                    surrogate_ok = false;
                    notes.push(format!("{model}/{method}/{metric} empty or all zero"));
                }
            }
        }
    }
    let overlap = |m: &str| {
        run.overlap
            .as_array()
            .and_then(|a| a.iter().find(|o| o["model_id"] == "lr" && o["surrogate"] == m))
            .and_then(|o| o["mean_overlap"].as_f64())
    };
    let (shap, lime) = (overlap("shap"), overlap("lime"));
    let ordered = matches!((shap, lime), (Some(s), Some(l)) if s > l);
    format!(
        "{} surrogate distributions finite and nonzero: {}; LR top-10 overlap truth/SHAP {:?} vs truth/LIME {:?} ({}){}",
        if surrogate_ok && ordered { "matches" } else { "differs" },
        surrogate_ok,
        shap,
        lime,
        if ordered { "SHAP higher" } else { "SHAP not higher" },
        if notes.is_empty() { String::new() } else { format!("; {}", notes.join(", ")) }
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("1 Algorithm 1 statistics", algorithm1),
        ("2 Lipschitz homogeneity", lipschitz_homogeneity),
        ("3 infidelity zero and closed form", infidelity_zero_and_oracle),
        ("4 Shapley correctness", shapley_correctness),
        ("5 integrated gradients completeness", ig_completeness),
        ("6 Pareto reproduction on Table 2", pareto_table2),
        ("7 AUC oracle", auc_oracle),
    ];
    let mut failed = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(msg) => println!("PASS criterion {name}: {msg}"),
        Err(msg) => {
            failed += 1;
            println!("FAIL criterion {name}: {msg}");
        }
    };
    for (name, f) in criteria {
        report(name, f());
    }
    let dir = tempfile::TempDir::new().expect("temp dir");
    match end_to_end(dir.path()) {
        Ok((msg, run)) => {
            report("8 end-to-end determinism", Ok(msg));
            println!("INFO criterion 9 qualitative (not gating): {}", qualitative(&run));
        }
        Err(e) => {
            report("8 end-to-end determinism", Err(e));
            println!("INFO criterion 9 qualitative (not gating): skipped, pipeline did not complete");
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all gating acceptance criteria passed");
}
