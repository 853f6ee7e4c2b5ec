//! Tokenization, corpus ingestion, vocabulary construction and TF-IDF.
//!
//! Tokens are lowercase alphanumeric runs; every maximal digit run becomes the
//! literal token [`NUMBER_TOKEN`]. Vocabulary indices are ordered by
//! (document frequency descending, token ascending) so that two fits on the
//! same corpus are identical.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

pub const NUMBER_TOKEN: &str = "numbertoken";

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Letter,
    Digit,
    Other,
}

fn classify(c: char) -> CharClass {
    if c.is_ascii_digit() || (c.is_numeric() && !c.is_alphabetic()) {
        CharClass::Digit
    } else if c.is_alphanumeric() {
        CharClass::Letter
    } else {
        CharClass::Other
    }
}

/// Splits raw text into lowercase tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut class = CharClass::Other;
    for c in text.chars() {
        let next = classify(c);
        if next != class {
            flush(&mut tokens, &mut current, class);
            class = next;
        }
        if next == CharClass::Letter {
            current.extend(c.to_lowercase());
        }
        if next == CharClass::Digit {
            current.push(c);
        }
    }
    flush(&mut tokens, &mut current, class);
    tokens
}

fn flush(tokens: &mut Vec<String>, current: &mut String, class: CharClass) {
    match class {
        CharClass::Letter if !current.is_empty() => tokens.push(std::mem::take(current)),
        CharClass::Digit => {
            tokens.push(NUMBER_TOKEN.to_string());
            current.clear();
        }
        _ => current.clear(),
    }
}

/// A labelled, tokenized document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub label: u8,
    pub tokens: Vec<String>,
}

impl Document {
    /// Tokenizes `text`; rejects empty documents and labels outside {0, 1}.
    pub fn new(id: impl Into<String>, label: u8, text: &str) -> Result<Self> {
        Self::from_tokens(id, label, tokenize(text))
    }

    pub fn from_tokens(id: impl Into<String>, label: u8, tokens: Vec<String>) -> Result<Self> {
        let id = id.into();
        if label > 1 {
            return Err(Error::InvalidInput(format!("document {id}: label {label} not in {{0,1}}")));
        }
        if tokens.is_empty() {
            return Err(Error::InvalidInput(format!("document {id} is empty after tokenization")));
        }
        Ok(Self { id, label, tokens })
    }
}

/// Parses a `label<TAB>text` corpus. Document ids are `<prefix>-<line>`.
pub fn parse_corpus(content: &str, source: &Path, id_prefix: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (n, line) in content.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (label, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(source, line_no, "expected `label<TAB>text`"))?;
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::parse(source, line_no, format!("label {other:?} not in {{0,1}}"))),
        };
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(Error::parse(source, line_no, "document is empty after tokenization"));
        }
        docs.push(Document {
            id: format!("{id_prefix}-{line_no}"),
            label,
            tokens,
        });
    }
    if docs.is_empty() {
        return Err(Error::parse(source, 0, "corpus contains no documents"));
    }
    Ok(docs)
}

pub fn read_corpus(path: &Path, id_prefix: &str) -> Result<Vec<Document>> {
    let content = std::fs::read_to_string(path)?;
    parse_corpus(&content, path, id_prefix)
}

/// Expands a token sequence into unigram (and optionally bigram) features.
pub fn features(tokens: &[String], ngram_max: usize) -> Vec<String> {
    let mut out: Vec<String> = tokens.to_vec();
    if ngram_max >= 2 {
        out.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabConfig {
    pub min_df: usize,
    pub max_features: Option<usize>,
    /// 1 for unigrams, 2 to add bigrams.
    pub ngram_max: usize,
}

impl Default for VocabConfig {
    fn default() -> Self {
        Self {
            min_df: 1,
            max_features: None,
            ngram_max: 1,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawVocabulary {
    tokens: Vec<String>,
    document_frequency: Vec<usize>,
    n_docs: usize,
    ngram_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVocabulary", into = "RawVocabulary")]
pub struct Vocabulary {
    tokens: Vec<String>,
    document_frequency: Vec<usize>,
    n_docs: usize,
    ngram_max: usize,
    token_to_index: HashMap<String, usize>,
}

impl TryFrom<RawVocabulary> for Vocabulary {
    type Error = String;

    fn try_from(raw: RawVocabulary) -> Result<Self, String> {
        if raw.tokens.len() != raw.document_frequency.len() {
            return Err("tokens and document_frequency lengths differ".into());
        }
        let token_to_index: HashMap<String, usize> =
            raw.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if token_to_index.len() != raw.tokens.len() {
            return Err("duplicate token in vocabulary".into());
        }
        Ok(Self {
            tokens: raw.tokens,
            document_frequency: raw.document_frequency,
            n_docs: raw.n_docs,
            ngram_max: raw.ngram_max,
            token_to_index,
        })
    }
}

impl From<Vocabulary> for RawVocabulary {
    fn from(v: Vocabulary) -> Self {
        Self {
            tokens: v.tokens,
            document_frequency: v.document_frequency,
            n_docs: v.n_docs,
            ngram_max: v.ngram_max,
        }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn ngram_max(&self) -> usize {
        self.ngram_max
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.token_to_index.get(token).copied()
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }
}

pub fn build_vocab(corpus: &[Document], config: &VocabConfig) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("corpus is empty".into()));
    }
    let min_df = config.min_df.max(1);
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus {
        let unique: HashSet<String> = features(&doc.tokens, config.ngram_max).into_iter().collect();
        for t in unique {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df.into_iter().filter(|(_, c)| *c >= min_df).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_df });
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if let Some(cap) = config.max_features {
        kept.truncate(cap);
    }
    let (tokens, document_frequency): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
    let token_to_index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Ok(Vocabulary {
        tokens,
        document_frequency,
        n_docs: corpus.len(),
        ngram_max: config.ngram_max,
        token_to_index,
    })
}

/// Smoothed inverse document frequency, always strictly positive.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
}

/// Fits idf weights. The corpus argument is the one the vocabulary was built
/// from; document frequencies are taken from the vocabulary.
pub fn fit_tfidf(corpus: &[Document], vocabulary: Vocabulary) -> Result<TfidfModel> {
    if corpus.len() != vocabulary.n_docs {
        return Err(Error::InvalidInput(format!(
            "vocabulary was built from {} documents, corpus has {}",
            vocabulary.n_docs,
            corpus.len()
        )));
    }
    let idf = vocabulary
        .document_frequency
        .iter()
        .map(|&df| smoothed_idf(vocabulary.n_docs, df))
        .collect();
    Ok(TfidfModel { vocabulary, idf })
}

impl TfidfModel {
    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    /// Raw term frequency × idf, ℓ2-normalized. Out-of-vocabulary tokens are
    /// ignored; a document with none in vocabulary yields the zero vector.
    pub fn transform(&self, tokens: &[String]) -> SparseVector {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for f in features(tokens, self.vocabulary.ngram_max) {
            if let Some(i) = self.vocabulary.index_of(&f) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        if counts.is_empty() {
            log::warn!("document has no in-vocabulary tokens; transformed to the zero vector");
            return SparseVector::zeros(self.dim());
        }
        let norm = counts
            .iter()
            .map(|(&i, &tf)| (tf * self.idf[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        SparseVector::from_sorted_pairs(
            self.dim(),
            counts.into_iter().map(|(i, tf)| (i, tf * self.idf[i] / norm)),
        )
    }

    pub fn transform_doc(&self, doc: &Document) -> SparseVector {
        self.transform(&doc.tokens)
    }
}
