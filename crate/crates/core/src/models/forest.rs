//! Bagged CART trees with Gini splits over a random feature subset per node.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_dim, check_training_data, logit, vector_classify, Classifier, Input, RepresentationKind, VectorModel};
use crate::error::{Error, Result};
use crate::seeds::derive_seed;
use crate::sparse::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    /// Go left when `x[feature] <= threshold`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        prob: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &SparseVector) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { prob } => return prob,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if x.get(feature) <= threshold { left } else { right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub dim: usize,
    pub trees: Vec<Tree>,
    pub config: ForestConfig,
}

impl ForestModel {
    pub fn from_trees(dim: usize, trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidInput("forest needs at least one tree".into()));
        }
        for t in &trees {
            for n in &t.nodes {
                if let TreeNode::Leaf { prob } = n {
                    if !(0.0..=1.0).contains(prob) {
                        return Err(Error::InvalidInput(format!("leaf probability {prob} outside [0,1]")));
                    }
                }
            }
        }
        Ok(Self {
            dim,
            config: ForestConfig {
                n_trees: trees.len(),
                ..Default::default()
            },
            trees,
        })
    }
}

impl VectorModel for ForestModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn proba(&self, x: &SparseVector) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64)
    }

    /// Logit of the clamped forest probability.
    fn logit(&self, x: &SparseVector) -> Result<f64> {
        self.proba(x).map(logit)
    }
}

impl Classifier for ForestModel {
    fn representation(&self) -> RepresentationKind {
        RepresentationKind::SparseVector
    }

    fn predict_proba(&self, input: Input<'_>) -> Result<f64> {
        vector_classify(self, input)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Fraction of features tried per node; `None` means √V.
    pub mtry_fraction: Option<f64>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 12,
            mtry_fraction: None,
            seed: 0,
        }
    }
}

struct Columns<'a> {
    cols: Vec<Vec<(usize, f64)>>,
    y: &'a [u8],
}

struct Grower<'a> {
    data: &'a Columns<'a>,
    max_depth: usize,
    mtry: usize,
    rng: ChaCha8Rng,
    /// Bootstrap multiplicity of each sample inside the node being split.
    weight: Vec<f64>,
    nodes: Vec<TreeNode>,
}

#[derive(Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn gini_mass(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    total * 2.0 * p * (1.0 - p)
}

impl Grower<'_> {
    fn grow(&mut self, samples: &[(usize, f64)], depth: usize) -> usize {
        let total: f64 = samples.iter().map(|s| s.1).sum();
        let pos: f64 = samples.iter().filter(|s| self.data.y[s.0] == 1).map(|s| s.1).sum();
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { prob: pos / total });
        if depth >= self.max_depth || pos == 0.0 || pos == total || samples.len() < 2 {
            return id;
        }
        let Some(split) = self.best_split(samples, total, pos) else {
            return id;
        };
        let (left, right): (Vec<_>, Vec<_>) = {
            let col = &self.data.cols[split.feature];
            samples.iter().partition(|s| {
                let v = col.binary_search_by_key(&s.0, |e| e.0).map_or(0.0, |p| col[p].1);
                v <= split.threshold
            })
        };
        let l = self.grow(&left, depth + 1);
        let r = self.grow(&right, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        id
    }

    fn best_split(&mut self, samples: &[(usize, f64)], total: f64, pos: f64) -> Option<Split> {
        let dim = self.data.cols.len();
        let mut features = index::sample(&mut self.rng, dim, self.mtry).into_vec();
        features.sort_unstable();
        for &(i, w) in samples {
            self.weight[i] = w;
        }
        let parent = gini_mass(pos, total);
        let mut best: Option<Split> = None;
        let mut items: Vec<(f64, f64, f64)> = Vec::new();
        for f in features {
            items.clear();
            let (mut nz_total, mut nz_pos) = (0.0, 0.0);
            for &(i, v) in &self.data.cols[f] {
                let w = self.weight[i];
                if w > 0.0 {
                    let p = if self.data.y[i] == 1 { w } else { 0.0 };
                    items.push((v, w, p));
                    nz_total += w;
                    nz_pos += p;
                }
            }
            if nz_total < total {
                items.push((0.0, total - nz_total, pos - nz_pos));
            }
            items.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (mut lt, mut lp) = (0.0, 0.0);
            for k in 0..items.len().saturating_sub(1) {
                lt += items[k].1;
                lp += items[k].2;
                if items[k].0 == items[k + 1].0 {
                    continue;
                }
                let impurity = gini_mass(lp, lt) + gini_mass(pos - lp, total - lt);
                if impurity < parent - 1e-12 && best.is_none_or(|b| impurity < b.impurity) {
                    best = Some(Split {
                        feature: f,
                        threshold: 0.5 * (items[k].0 + items[k + 1].0),
                        impurity,
                    });
                }
            }
        }
        for &(i, _) in samples {
            self.weight[i] = 0.0;
        }
        best
    }
}

/// Bagging with a bootstrap per tree; every tree draws from its own stream
/// derived from `(seed, tree index)`, so results do not depend on thread count.
pub fn train_forest(x: &[SparseVector], y: &[u8], cfg: &ForestConfig) -> Result<ForestModel> {
    check_training_data(x.len(), y)?;
    if cfg.n_trees == 0 {
        return Err(Error::InvalidInput("n_trees must be positive".into()));
    }
    let n = x.len();
    let dim = x[0].dim();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    for (i, v) in x.iter().enumerate() {
        check_dim(dim, v)?;
        for (j, val) in v.iter() {
            cols[j].push((i, val));
        }
    }
    let data = Columns { cols, y };
    let mtry = match cfg.mtry_fraction {
        Some(f) if f > 0.0 && f <= 1.0 => ((f * dim as f64).round() as usize).clamp(1, dim),
        Some(f) => return Err(Error::InvalidInput(format!("mtry_fraction {f} not in (0, 1]"))),
        None => ((dim as f64).sqrt().round() as usize).clamp(1, dim),
    };
    let trees: Vec<Tree> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "forest-tree", t as u64));
            let mut counts = vec![0.0; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1.0;
            }
            let samples: Vec<(usize, f64)> =
                counts.iter().enumerate().filter(|(_, c)| **c > 0.0).map(|(i, c)| (i, *c)).collect();
            let mut grower = Grower {
                data: &data,
                max_depth: cfg.max_depth,
                mtry,
                rng,
                weight: vec![0.0; n],
                nodes: Vec::new(),
            };
            grower.grow(&samples, 0);
            Tree { nodes: grower.nodes }
        })
        .collect();
    Ok(ForestModel {
        dim,
        trees,
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tradeoff::auc;

    fn stump() -> ForestModel {
        ForestModel::from_trees(
            1,
            vec![Tree {
                nodes: vec![
                    TreeNode::Split { feature: 0, threshold: 0.5, left: 1, right: 2 },
                    TreeNode::Leaf { prob: 0.2 },
                    TreeNode::Leaf { prob: 0.9 },
                ],
            }],
        )
        .unwrap()
    }

    #[test]
    fn stump_prediction() {
        let m = stump();
        assert_eq!(m.proba(&SparseVector::from_dense(&[0.7])).unwrap(), 0.9);
        assert_eq!(m.proba(&SparseVector::from_dense(&[0.3])).unwrap(), 0.2);
    }

    fn noisy(n: usize, seed: u64) -> (Vec<SparseVector>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let row: Vec<f64> = (0..5).map(|_| if rng.random::<f64>() < 0.5 { rng.random::<f64>() } else { 0.0 }).collect();
            let p = if row[0] + row[1] > 0.6 { 0.8 } else { 0.2 };
            ys.push((rng.random::<f64>() < p) as u8);
            xs.push(SparseVector::from_dense(&row));
        }
        (xs, ys)
    }

    #[test]
    fn depth_zero_is_bootstrap_base_rate() {
        let (x, y) = noisy(50, 1);
        let m = train_forest(&x, &y, &ForestConfig { n_trees: 5, max_depth: 0, ..Default::default() }).unwrap();
        for t in &m.trees {
            assert_eq!(t.nodes.len(), 1);
        }
        let rate = y.iter().map(|&v| v as f64).sum::<f64>() / 50.0;
        let p = m.proba(&x[0]).unwrap();
        assert!((p - rate).abs() < 0.2);
    }

    #[test]
    fn separable_stumps_reach_auc_one() {
        let x: Vec<SparseVector> = (0..40).map(|i| SparseVector::from_dense(&[i as f64 / 40.0])).collect();
        let y: Vec<u8> = (0..40).map(|i| (i >= 20) as u8).collect();
        let m = train_forest(&x, &y, &ForestConfig { n_trees: 25, max_depth: 1, ..Default::default() }).unwrap();
        let s: Vec<f64> = x.iter().map(|v| m.proba(v).unwrap()).collect();
        assert_eq!(auc(&s, &y).unwrap(), 1.0);
    }

    #[test]
    fn seeds_control_determinism() {
        let (x, y) = noisy(100, 3);
        let cfg = ForestConfig { n_trees: 10, max_depth: 4, seed: 1, ..Default::default() };
        let a = train_forest(&x, &y, &cfg).unwrap();
        let b = train_forest(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        let c = train_forest(&x, &y, &ForestConfig { seed: 2, ..cfg }).unwrap();
        assert!(x.iter().any(|v| a.proba(v).unwrap() != c.proba(v).unwrap()));
    }

    #[test]
    fn prediction_is_mean_of_leaves_and_in_unit_interval() {
        let (x, y) = noisy(120, 4);
        let m = train_forest(&x, &y, &ForestConfig { n_trees: 7, max_depth: 6, ..Default::default() }).unwrap();
        for v in &x {
            let mean = m.trees.iter().map(|t| t.predict(v)).sum::<f64>() / 7.0;
            let p = m.proba(v).unwrap();
            assert_eq!(p, mean);
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let (x, y) = noisy(100, 6);
        let cfg = ForestConfig { n_trees: 12, max_depth: 5, seed: 3, ..Default::default() };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| train_forest(&x, &y, &cfg)).unwrap();
        let b = train_forest(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
