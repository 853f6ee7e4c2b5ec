//! Nearest-neighbor token replacement and Gaussian input noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::embeddings::{EmbeddingTable, NeighborIndex};
use crate::error::{Error, Result};
use crate::seeds::derive_seed;
use crate::sparse::SparseVector;
use crate::text::Document;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Probability proportional to `1 / (1 + distance)`.
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub pi: f64,
    pub k: usize,
    pub seed: u64,
    pub weighting: Weighting,
    /// Tokens never replaced even when indexed.
    pub exclude: Vec<String>,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            pi: 0.1,
            k: 10,
            seed: 0,
            weighting: Weighting::Uniform,
            exclude: Vec::new(),
        }
    }
}

impl PerturbationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pi) {
            return Err(Error::Config(format!("pi must lie in [0, 1], got {}", self.pi)));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbedDoc {
    pub source_id: String,
    pub draw: usize,
    pub tokens: Vec<String>,
    pub replaced_positions: Vec<usize>,
    /// Positions whose token has no neighbors to draw from.
    pub out_of_index: usize,
    /// Same tokens as an earlier draw of the same neighborhood.
    pub duplicate: bool,
}

/// Algorithm 1 on a token sequence with an explicit generator: every position
/// draws `u ~ U[0,1)` and is selected when `u < pi`; a selected indexed token is
/// replaced by a draw from its `min(k, available)` nearest neighbors.
pub fn perturb_tokens(
    tokens: &[String],
    table: &EmbeddingTable,
    index: &NeighborIndex,
    cfg: &PerturbationConfig,
    rng: &mut impl Rng,
) -> (Vec<String>, Vec<usize>, usize) {
    let mut out = tokens.to_vec();
    let mut replaced = Vec::new();
    let mut out_of_index = 0;
    for (p, tok) in tokens.iter().enumerate() {
        let u: f64 = rng.random();
        let row = table.index_of(tok).filter(|&i| i < index.len() && index.is_indexed(i));
        let Some(i) = row else {
            out_of_index += 1;
            continue;
        };
        if u >= cfg.pi || cfg.exclude.iter().any(|e| e == tok) {
            continue;
        }
        let avail = cfg.k.min(index.neighbors(i).len());
        if avail == 0 {
            continue;
        }
        let pick = match cfg.weighting {
            Weighting::Uniform => rng.random_range(0..avail),
            Weighting::Distance => {
                let w: Vec<f64> = index.distances(i)[..avail].iter().map(|d| 1.0 / (1.0 + d)).collect();
                let mut r = rng.random::<f64>() * w.iter().sum::<f64>();
                let mut choice = avail - 1;
                for (j, wj) in w.iter().enumerate() {
                    if r < *wj {
                        choice = j;
                        break;
                    }
                    r -= wj;
                }
                choice
            }
        };
        out[p] = table.tokens()[index.neighbors(i)[pick]].clone();
        replaced.push(p);
    }
    (out, replaced, out_of_index)
}

pub fn perturb_document(doc: &Document, table: &EmbeddingTable, index: &NeighborIndex, cfg: &PerturbationConfig) -> Result<PerturbedDoc> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (tokens, replaced_positions, out_of_index) = perturb_tokens(&doc.tokens, table, index, cfg, &mut rng);
    Ok(PerturbedDoc {
        source_id: doc.id.clone(),
        draw: 0,
        tokens,
        replaced_positions,
        out_of_index,
        duplicate: false,
    })
}

/// Seed of draw `draw` of the neighborhood of `doc_id`.
pub fn draw_seed(seed: u64, doc_id: &str, draw: usize) -> u64 {
    derive_seed(seed, &format!("perturb:{doc_id}"), draw as u64)
}

/// `m` independent draws, each reproducible alone from (seed, doc id, draw index).
pub fn make_neighborhood(
    doc: &Document,
    table: &EmbeddingTable,
    index: &NeighborIndex,
    cfg: &PerturbationConfig,
    m: usize,
) -> Result<Vec<PerturbedDoc>> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::Config("neighborhood size m must be at least 1".into()));
    }
    let mut out: Vec<PerturbedDoc> = Vec::with_capacity(m);
    for draw in 0..m {
        let mut rng = ChaCha8Rng::seed_from_u64(draw_seed(cfg.seed, &doc.id, draw));
        let (tokens, replaced_positions, out_of_index) = perturb_tokens(&doc.tokens, table, index, cfg, &mut rng);
        let duplicate = out.iter().any(|d| d.tokens == tokens);
        out.push(PerturbedDoc {
            source_id: doc.id.clone(),
            draw,
            tokens,
            replaced_positions,
            out_of_index,
            duplicate,
        });
    }
    Ok(out)
}

/// Checks length preservation and that each replacement is a k-NN of the source token.
pub fn verify_perturbation(source: &[String], p: &PerturbedDoc, table: &EmbeddingTable, index: &NeighborIndex, k: usize) -> Result<()> {
    if p.tokens.len() != source.len() {
        return Err(Error::InvalidInput(format!(
            "draw {} has {} tokens, source has {}",
            p.draw,
            p.tokens.len(),
            source.len()
        )));
    }
    for (pos, (a, b)) in source.iter().zip(&p.tokens).enumerate() {
        let replaced = p.replaced_positions.binary_search(&pos).is_ok();
        if !replaced {
            if a != b {
                return Err(Error::InvalidInput(format!("draw {} changed unmarked position {pos}", p.draw)));
            }
            continue;
        }
        let ok = match (table.index_of(a), table.index_of(b)) {
            (Some(i), Some(j)) => index.neighbors(i).iter().take(k).any(|&n| n == j),
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidInput(format!(
                "draw {} position {pos}: {b:?} is not among the {k} neighbors of {a:?}",
                p.draw
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianNoiseConfig {
    pub sigma_scale: f64,
    pub seed: u64,
    pub n_draws: usize,
    /// Perturb every coordinate instead of only the input's support.
    pub full_support: bool,
}

impl Default for GaussianNoiseConfig {
    fn default() -> Self {
        Self {
            sigma_scale: 0.1,
            seed: 0,
            n_draws: 50,
            full_support: false,
        }
    }
}

impl GaussianNoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_scale >= 0.0 && self.sigma_scale.is_finite()) {
            return Err(Error::Config(format!("sigma_scale must be finite and >= 0, got {}", self.sigma_scale)));
        }
        if self.n_draws == 0 {
            return Err(Error::Config("n_draws must be at least 1".into()));
        }
        Ok(())
    }
}

/// Population standard deviation of each coordinate over a sample.
pub fn componentwise_std(xs: &[SparseVector]) -> Result<Vec<f64>> {
    let Some(first) = xs.first() else {
        return Err(Error::InvalidInput("standard deviation of an empty sample".into()));
    };
    let dim = first.dim();
    let mut sum = vec![0.0; dim];
    let mut sq = vec![0.0; dim];
    for x in xs {
        if x.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: x.dim() });
        }
        for (i, v) in x.iter() {
            sum[i] += v;
            sq[i] += v * v;
        }
    }
    let n = xs.len() as f64;
    Ok(sum
        .iter()
        .zip(&sq)
        .map(|(s, q)| {
            let mean = s / n;
            (q / n - mean * mean).max(0.0).sqrt()
        })
        .collect())
}

/// Per-dimension standard deviation over rows of row-major matrices.
pub fn rowwise_std(matrices: &[Vec<f64>], dim: usize) -> Result<Vec<f64>> {
    let mut sum = vec![0.0; dim];
    let mut sq = vec![0.0; dim];
    let mut n = 0usize;
    for m in matrices {
        for row in m.chunks_exact(dim) {
            n += 1;
            for d in 0..dim {
                sum[d] += row[d];
                sq[d] += row[d] * row[d];
            }
        }
    }
    if n == 0 {
        return Err(Error::InvalidInput("standard deviation of an empty sample".into()));
    }
    let n = n as f64;
    Ok(sum.iter().zip(&sq).map(|(s, q)| (q / n - (s / n).powi(2)).max(0.0).sqrt()).collect())
}

/// `n_draws` noise vectors `I ~ N(0, diag((sigma_scale·std)²))`, restricted to
/// the support of `x` unless `full_support` is set.
pub fn gaussian_perturbations(x: &SparseVector, std: &[f64], cfg: &GaussianNoiseConfig) -> Result<Vec<SparseVector>> {
    cfg.validate()?;
    if std.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: std.len(),
        });
    }
    let coords: Vec<usize> = if cfg.full_support {
        (0..x.dim()).collect()
    } else {
        x.indices().to_vec()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((0..cfg.n_draws)
        .map(|_| {
            SparseVector::from_sorted_pairs(
                x.dim(),
                coords.iter().map(|&i| {
                    let z: f64 = rng.sample(StandardNormal);
                    (i, z * cfg.sigma_scale * std[i])
                }),
            )
        })
        .collect())
}

/// Dense noise for a row-major `n × dim` matrix with per-column std.
pub fn gaussian_matrix_perturbations(n_rows: usize, std: &[f64], cfg: &GaussianNoiseConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok((0..cfg.n_draws)
        .map(|_| {
            (0..n_rows * std.len())
                .map(|c| {
                    let z: f64 = rng.sample(StandardNormal);
                    z * cfg.sigma_scale * std[c % std.len()]
                })
                .collect()
        })
        .collect())
}
