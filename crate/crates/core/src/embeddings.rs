//! Token embeddings and the exact k-nearest-neighbor index used for
//! neighbor-replacement perturbations.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{build_vocab, Document, VocabConfig, Vocabulary};

#[derive(Serialize, Deserialize)]
struct RawTable {
    tokens: Vec<String>,
    dim: usize,
    matrix: Vec<f64>,
    excluded: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct EmbeddingTable {
    tokens: Vec<String>,
    dim: usize,
    matrix: Vec<f64>,
    index: HashMap<String, usize>,
    excluded: Vec<bool>,
}

impl TryFrom<RawTable> for EmbeddingTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        EmbeddingTable::new(raw.tokens, raw.dim, raw.matrix)?.with_excluded(&raw.excluded)
    }
}

impl From<EmbeddingTable> for RawTable {
    fn from(t: EmbeddingTable) -> Self {
        let excluded = t.excluded_tokens();
        RawTable {
            tokens: t.tokens,
            dim: t.dim,
            matrix: t.matrix,
            excluded,
        }
    }
}

/// Tokens present in an embedding file but absent from the task vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub n_tokens: usize,
    pub not_in_vocabulary: Vec<String>,
}

impl EmbeddingTable {
    pub fn new(tokens: Vec<String>, dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != tokens.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: tokens.len() * dim,
                actual: matrix.len(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("embedding entries must be finite".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate token {t:?}")));
            }
        }
        let excluded = vec![false; tokens.len()];
        Ok(Self { tokens, dim, matrix, index, excluded })
    }

    /// Marks tokens that must not take part in neighbor search.
    pub fn with_excluded(mut self, excluded: &[String]) -> Result<Self> {
        for t in excluded {
            let i = self
                .index_of(t)
                .ok_or_else(|| Error::InvalidInput(format!("excluded token {t:?} not in table")))?;
            self.excluded[i] = true;
        }
        Ok(self)
    }

    pub fn is_excluded(&self, i: usize) -> bool {
        self.excluded[i]
    }

    pub fn excluded_tokens(&self) -> Vec<String> {
        (0..self.len()).filter(|&i| self.excluded[i]).map(|i| self.tokens[i].clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.matrix[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.row(i))
    }

    pub fn is_zero_row(&self, i: usize) -> bool {
        self.row(i).iter().all(|&v| v == 0.0)
    }

    pub fn report_against(&self, vocabulary: &Vocabulary) -> LoadReport {
        LoadReport {
            n_tokens: self.len(),
            not_in_vocabulary: self
                .tokens
                .iter()
                .filter(|t| vocabulary.index_of(t).is_none())
                .cloned()
                .collect(),
        }
    }

    /// Serializes in word2vec text format. Values use shortest round-trip formatting.
    pub fn to_word2vec(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(t);
            for v in self.row(i) {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_word2vec())?;
        Ok(())
    }
}

/// Parses word2vec text format: a `V dim` header then `token v1 .. v_dim` lines.
pub fn parse_word2vec(content: &str, source: &Path) -> Result<EmbeddingTable> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(source, 1, "missing header"))?;
    let mut parts = header.split_whitespace();
    let (n, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(d), None) => (
            n.parse::<usize>().map_err(|_| Error::parse(source, 1, "malformed header"))?,
            d.parse::<usize>().map_err(|_| Error::parse(source, 1, "malformed header"))?,
        ),
        _ => return Err(Error::parse(source, 1, "malformed header: expected `V dim`")),
    };
    if dim == 0 {
        return Err(Error::parse(source, 1, "malformed header: dim must be positive"));
    }
    let mut tokens = Vec::with_capacity(n);
    let mut matrix = Vec::with_capacity(n * dim);
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let token = fields.next().unwrap_or_default().to_string();
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(Error::parse(
                source,
                line_no,
                format!("dimension mismatch: expected {dim} values, found {}", values.len()),
            ));
        }
        if let Some(first) = seen.insert(token.clone(), line_no) {
            return Err(Error::parse(
                source,
                line_no,
                format!("duplicate token {token:?} (first seen on line {first})"),
            ));
        }
        for v in values {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::parse(source, line_no, format!("invalid number {v:?}")))?;
            if !x.is_finite() {
                return Err(Error::parse(source, line_no, "non-finite value"));
            }
            matrix.push(x);
        }
        tokens.push(token);
    }
    if tokens.len() != n {
        return Err(Error::parse(
            source,
            1,
            format!("header declares {n} tokens, file contains {}", tokens.len()),
        ));
    }
    EmbeddingTable::new(tokens, dim, matrix)
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let content = std::fs::read_to_string(path)?;
    parse_word2vec(&content, path)
}

/// Symmetric co-occurrence counts within `±window`, excluding a token paired with itself.
pub(crate) fn cooccurrence(corpus: &[Document], vocab: &Vocabulary, window: usize) -> Vec<BTreeMap<usize, f64>> {
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); vocab.len()];
    for doc in corpus {
        let ids: Vec<Option<usize>> = doc.tokens.iter().map(|t| vocab.index_of(t)).collect();
        for (p, a) in ids.iter().enumerate() {
            let Some(a) = *a else { continue };
            for b in ids.iter().skip(p + 1).take(window).flatten() {
                if *b == a {
                    continue;
                }
                *rows[a].entry(*b).or_insert(0.0) += 1.0;
                *rows[*b].entry(a).or_insert(0.0) += 1.0;
            }
        }
    }
    rows
}

/// Positive pointwise mutual information of a symmetric count matrix.
pub(crate) fn ppmi(counts: &[BTreeMap<usize, f64>]) -> Vec<Vec<(usize, f64)>> {
    let row_sums: Vec<f64> = counts.iter().map(|r| r.values().sum()).collect();
    let total: f64 = row_sums.iter().sum();
    counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .filter_map(|(&j, &c)| {
                    let pmi = (c * total / (row_sums[i] * row_sums[j])).ln();
                    (pmi > 0.0).then_some((j, pmi))
                })
                .collect()
        })
        .collect()
}

/// Top eigenpairs by |eigenvalue| of a symmetric matrix given as sparse rows.
/// Returns (eigenvalues, column-major eigenvectors of length n each).
fn top_eigenpairs(rows: &[Vec<(usize, f64)>], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    if n <= 600 {
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                dense[(i, j)] = v;
            }
        }
        let eig = SymmetricEigen::new(dense);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .abs()
                .total_cmp(&eig.eigenvalues[a].abs())
                .then(a.cmp(&b))
        });
        let vals = order.iter().take(k).map(|&c| eig.eigenvalues[c]).collect();
        let vecs = order
            .iter()
            .take(k)
            .map(|&c| eig.eigenvectors.column(c).iter().copied().collect())
            .collect();
        (vals, vecs)
    } else {
        subspace_iteration(rows, k, 60)
    }
}

fn sparse_matmul(rows: &[Vec<(usize, f64)>], q: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(q.nrows(), q.ncols());
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            for c in 0..q.ncols() {
                out[(i, c)] += v * q[(j, c)];
            }
        }
    }
    out
}

/// Block power iteration with Rayleigh–Ritz extraction; deterministic start.
fn subspace_iteration(rows: &[Vec<(usize, f64)>], k: usize, iters: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let p = (k + 10).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e16e);
    let mut q = DMatrix::<f64>::from_fn(n, p, |_, _| rng.random::<f64>() - 0.5);
    q = q.qr().q();
    for _ in 0..iters {
        q = sparse_matmul(rows, &q).qr().q();
    }
    let aq = sparse_matmul(rows, &q);
    let small = q.transpose() * &aq;
    let small = (&small + small.transpose()) * 0.5;
    let eig = SymmetricEigen::new(small);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .total_cmp(&eig.eigenvalues[a].abs())
            .then(a.cmp(&b))
    });
    let vals = order.iter().take(k).map(|&c| eig.eigenvalues[c]).collect();
    let vecs = order
        .iter()
        .take(k)
        .map(|&c| (&q * eig.eigenvectors.column(c)).iter().copied().collect())
        .collect();
    (vals, vecs)
}

/// Flips sign so the largest-magnitude entry (first on ties) is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Count-based embeddings: windowed co-occurrence, PPMI, then a rank-`dim`
/// truncated SVD with token vectors `U·sqrt(S)`. Tokens with no
/// co-occurrence get the zero vector.
pub fn train_embeddings(corpus: &[Document], dim: usize, window: usize) -> Result<EmbeddingTable> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("corpus is empty".into()));
    }
    if dim == 0 || window == 0 {
        return Err(Error::InvalidInput("dim and window must be positive".into()));
    }
    let vocab = build_vocab(corpus, &VocabConfig::default())?;
    if dim > vocab.len() {
        return Err(Error::InvalidInput(format!(
            "embedding dim {dim} exceeds vocabulary size {}",
            vocab.len()
        )));
    }
    let counts = cooccurrence(corpus, &vocab, window);
    let matrix = ppmi(&counts);
    let (vals, mut vecs) = top_eigenpairs(&matrix, dim);
    let max_abs = vals.first().map_or(0.0, |v| v.abs());
    let rank = vals.iter().take_while(|v| v.abs() > 1e-10 * max_abs.max(1e-300)).count();
    if rank < dim {
        log::warn!("embedding dim {dim} exceeds effective rank {rank}; reducing to {rank}");
    }
    let rank = rank.max(1);
    vecs.truncate(rank);
    vecs.iter_mut().for_each(|v| canonical_sign(v));
    let n = vocab.len();
    let mut data = vec![0.0; n * rank];
    for (c, v) in vecs.iter().enumerate() {
        let scale = vals[c].abs().sqrt();
        for i in 0..n {
            if !matrix[i].is_empty() {
                data[i * rank + c] = v[i] * scale;
            }
        }
    }
    let lonely: Vec<String> = (0..n)
        .filter(|&i| matrix[i].is_empty())
        .map(|i| vocab.token(i).to_string())
        .collect();
    EmbeddingTable::new(vocab.tokens().to_vec(), rank, data)?.with_excluded(&lonely)
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Exact k-nearest-neighbor lists by ℓ2 distance over the non-excluded rows of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborIndex {
    k: usize,
    neighbor_ids: Vec<Vec<usize>>,
    neighbor_dists: Vec<Vec<f64>>,
}

impl NeighborIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Neighbors of token `i`, nearest first. Empty for tokens excluded from the index.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbor_ids[i]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.neighbor_dists[i]
    }

    pub fn is_indexed(&self, i: usize) -> bool {
        !self.neighbor_ids[i].is_empty()
    }

    pub fn len(&self) -> usize {
        self.neighbor_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbor_ids.is_empty()
    }
}

/// Brute-force pairwise computation; ties broken by ascending token index.
pub fn build_neighbor_index(table: &EmbeddingTable, k: usize) -> Result<NeighborIndex> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let eligible: Vec<usize> = (0..table.len()).filter(|&i| !table.is_excluded(i)).collect();
    if eligible.len() < 2 {
        return Err(Error::InvalidInput(
            "neighbor index needs at least 2 tokens with co-occurrence vectors".into(),
        ));
    }
    let keep = k.min(eligible.len() - 1);
    let lists: Vec<(Vec<usize>, Vec<f64>)> = (0..table.len())
        .into_par_iter()
        .map(|i| {
            if table.is_excluded(i) {
                return (Vec::new(), Vec::new());
            }
            let mut cands: Vec<(f64, usize)> = eligible
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (l2_distance(table.row(i), table.row(j)), j))
                .collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if keep < cands.len() {
                cands.select_nth_unstable_by(keep, cmp);
                cands.truncate(keep);
            }
            cands.sort_by(cmp);
            cands.into_iter().map(|(d, j)| (j, d)).unzip()
        })
        .collect();
    let (neighbor_ids, neighbor_dists) = lists.into_iter().unzip();
    Ok(NeighborIndex { k, neighbor_ids, neighbor_dists })
}
