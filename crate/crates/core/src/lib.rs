//! Desk-scale text classifiers, local attribution methods, and
//! explanation-quality metrics (generalized local Lipschitz and infidelity),
//! with Pareto analysis of the performance/explainability tradeoff.

pub mod attributions;
pub mod embeddings;
pub mod error;
pub mod metrics;
pub mod models;
pub mod perturb;
pub mod pipeline;
pub mod plot;
pub mod seeds;
pub mod sparse;
pub mod synth;
pub mod text;
pub mod tradeoff;

pub use error::{Error, Result};
pub use sparse::SparseVector;
