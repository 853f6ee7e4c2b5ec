//! Sparse vectors over a fixed-dimensional feature space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sparse vector with strictly increasing indices and nonzero finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    #[serde(rename = "idx")]
    indices: Vec<usize>,
    #[serde(rename = "val")]
    values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a vector from raw parts, validating the invariants.
    pub fn new(dim: usize, indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        for w in indices.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidInput("indices must be strictly increasing".into()));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::InvalidInput(format!("index {last} out of range for dim {dim}")));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v == 0.0) {
            return Err(Error::InvalidInput("values must be finite and nonzero".into()));
        }
        Ok(Self { dim, indices, values })
    }

    /// Keeps the nonzero entries of a dense slice.
    pub fn from_dense(dense: &[f64]) -> Self {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, &v) in dense.iter().enumerate() {
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Self {
            dim: dense.len(),
            indices,
            values,
        }
    }

    /// Builds from (index, value) pairs in increasing index order, dropping zeros.
    pub(crate) fn from_sorted_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, v) in pairs {
            debug_assert!(indices.last().is_none_or(|&l| l < i));
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Self { dim, indices, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i]).sum()
    }

    /// Sparse dot product via a merge over both index lists.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    /// ℓ2 distance `‖self − other‖`.
    pub fn distance(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        loop {
            let d = match (self.indices.get(a), other.indices.get(b)) {
                (None, None) => break,
                (Some(_), None) => {
                    a += 1;
                    self.values[a - 1]
                }
                (None, Some(_)) => {
                    b += 1;
                    other.values[b - 1]
                }
                (Some(&i), Some(&j)) => {
                    if i < j {
                        a += 1;
                        self.values[a - 1]
                    } else if j < i {
                        b += 1;
                        other.values[b - 1]
                    } else {
                        a += 1;
                        b += 1;
                        self.values[a - 1] - other.values[b - 1]
                    }
                }
            };
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Returns a copy scaled to unit ℓ2 norm (the zero vector stays zero).
    pub fn normalized(&self) -> SparseVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Self {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v / n).collect(),
        }
    }
}
