//! Seeded synthetic labelled corpus with class-cue words and topical structure.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_docs: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub n_topics: usize,
    pub words_per_topic: usize,
    /// Cue words per class.
    pub n_cues: usize,
    /// Probability that a token is a cue word.
    pub cue_rate: f64,
    /// Probability that a cue word agrees with the label.
    pub cue_fidelity: f64,
    /// Fraction of documents written to the test split.
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_docs: 2000,
            min_len: 150,
            max_len: 250,
            n_topics: 8,
            words_per_topic: 30,
            n_cues: 15,
            cue_rate: 0.08,
            cue_fidelity: 0.75,
            test_fraction: 0.25,
            seed: 0,
        }
    }
}

/// Letters-only pseudo word: `prefix` followed by `i` in base 26.
fn word(prefix: &str, mut i: usize) -> String {
    let mut s = String::from(prefix);
    let mut suffix = Vec::new();
    loop {
        suffix.push((b'a' + (i % 26) as u8) as char);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    while suffix.len() < 2 {
        suffix.push('a');
    }
    s.extend(suffix.iter().rev());
    s
}

fn zipf_pick(rng: &mut impl Rng, n: usize) -> usize {
    // Weights 1/(r+1), inverted through the cumulative sum.
    let total: f64 = (1..=n).map(|r| 1.0 / r as f64).sum();
    let mut u = rng.random::<f64>() * total;
    for r in 0..n {
        let w = 1.0 / (r + 1) as f64;
        if u < w {
            return r;
        }
        u -= w;
    }
    n - 1
}

/// `(label, text)` pairs. Labels are balanced in expectation.
pub fn synthetic_corpus(cfg: &SynthConfig) -> Result<Vec<(u8, String)>> {
    if cfg.min_len == 0 || cfg.max_len < cfg.min_len || cfg.n_topics == 0 || cfg.words_per_topic == 0 || cfg.n_cues == 0 {
        return Err(Error::Config("synthetic corpus sizes must be positive with min_len <= max_len".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.n_docs);
    for _ in 0..cfg.n_docs {
        let label = rng.random_range(0..2u8);
        let len = rng.random_range(cfg.min_len..=cfg.max_len);
        let main_topic = rng.random_range(0..cfg.n_topics);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            let u: f64 = rng.random();
            if u < cfg.cue_rate {
                let agree = rng.random::<f64>() < cfg.cue_fidelity;
                let class = if agree { label } else { 1 - label };
                let prefix = if class == 1 { "pos" } else { "neg" };
                words.push(word(prefix, zipf_pick(&mut rng, cfg.n_cues)));
            } else if u < cfg.cue_rate + 0.01 {
                words.push(rng.random_range(1..500u32).to_string());
            } else {
                let topic = if rng.random::<f64>() < 0.7 {
                    main_topic
                } else {
                    rng.random_range(0..cfg.n_topics)
                };
                let w = topic * cfg.words_per_topic + zipf_pick(&mut rng, cfg.words_per_topic);
                words.push(word("t", w));
            }
        }
        out.push((label, words.join(" ")));
    }
    Ok(out)
}

/// Writes `train.tsv` and `test.tsv` under `dir`; the last `test_fraction`
/// of the documents form the test split.
pub fn write_synthetic(dir: &Path, cfg: &SynthConfig) -> Result<(PathBuf, PathBuf)> {
    let docs = synthetic_corpus(cfg)?;
    let n_test = ((docs.len() as f64) * cfg.test_fraction).round() as usize;
    let split = docs.len() - n_test.min(docs.len());
    fs::create_dir_all(dir)?;
    let render = |rows: &[(u8, String)]| rows.iter().map(|(l, t)| format!("{l}\t{t}\n")).collect::<String>();
    let train = dir.join("train.tsv");
    let test = dir.join("test.tsv");
    fs::write(&train, render(&docs[..split]))?;
    fs::write(&test, render(&docs[split..]))?;
    Ok((train, test))
}
