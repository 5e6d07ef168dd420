//! Labeled documents, tokenization, TF-IDF vocabulary and sparse vectors,
//! and seeded train/validation/test splits.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::taxonomy::{NodeId, Taxonomy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    /// Most specific class.
    pub label: NodeId,
    pub text: String,
}

/// Reads `doc_id<TAB>label<TAB>text` lines, validating labels against `taxonomy`.
pub fn load_corpus(text: &str, taxonomy: &Taxonomy) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::MalformedLine {
                line,
                reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let (doc_id, label, body) = (fields[0].trim(), fields[1].trim(), fields[2]);
        if doc_id.is_empty() || label.is_empty() {
            return Err(Error::MalformedLine {
                line,
                reason: "empty doc_id or label".into(),
            });
        }
        let idx = taxonomy.idx(label).map_err(|_| Error::UnknownLabel {
            line,
            label: label.to_string(),
        })?;
        if idx == taxonomy.root_idx() {
            return Err(Error::RootLabel {
                line,
                label: label.to_string(),
            });
        }
        if !seen.insert(doc_id.to_string()) {
            return Err(Error::DuplicateDocId {
                line,
                doc_id: doc_id.to_string(),
            });
        }
        docs.push(Document {
            doc_id: doc_id.to_string(),
            label: taxonomy.id(idx).clone(),
            text: body.to_string(),
        });
    }
    Ok(docs)
}

/// Lowercases, splits on runs of non-alphanumeric characters and drops
/// tokens shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|tok| tok.chars().nth(1).is_some())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<u32>,
    n_docs: u32,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// One entry per distinct training token, indexed by first appearance.
    pub fn build(train: &[Document]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let mut terms = Vec::new();
        let mut df = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut in_doc: HashSet<u32> = HashSet::new();
        for doc in train {
            in_doc.clear();
            for tok in tokenize(&doc.text) {
                let idx = match index.get(&tok) {
                    Some(&i) => i,
                    None => {
                        let i = terms.len() as u32;
                        terms.push(tok.clone());
                        df.push(0);
                        index.insert(tok, i);
                        i
                    }
                };
                if in_doc.insert(idx) {
                    df[idx as usize] += 1;
                }
            }
        }
        Ok(Vocabulary {
            terms,
            df,
            n_docs: train.len() as u32,
            index,
        })
    }

    /// Rebuilds a vocabulary from stored parts, checking its invariants.
    pub fn from_parts(terms: Vec<String>, df: Vec<u32>, n_docs: u32) -> Result<Self> {
        if terms.len() != df.len() {
            return Err(Error::VocabularyMismatch(format!(
                "{} terms but {} document frequencies",
                terms.len(),
                df.len()
            )));
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, (term, &d)) in terms.iter().zip(&df).enumerate() {
            if d == 0 || d > n_docs {
                return Err(Error::VocabularyMismatch(format!(
                    "df({term}) = {d} outside 1..={n_docs}"
                )));
            }
            if index.insert(term.clone(), i as u32).is_some() {
                return Err(Error::VocabularyMismatch(format!("duplicate term {term}")));
            }
        }
        Ok(Vocabulary {
            terms,
            df,
            n_docs,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn df(&self, index: u32) -> u32 {
        self.df[index as usize]
    }

    /// Smoothed inverse document frequency `ln((N + 1) / (df + 1))`.
    pub fn idf(&self, index: u32) -> f64 {
        ((self.n_docs as f64 + 1.0) / (self.df(index) as f64 + 1.0)).ln()
    }

    /// L2-normalized TF-IDF vector of `text`; out-of-vocabulary terms are dropped.
    pub fn vectorize_text(&self, text: &str) -> SparseVector {
        let mut tf: BTreeMap<u32, u32> = BTreeMap::new();
        for tok in tokenize(text) {
            if let Some(idx) = self.index_of(&tok) {
                *tf.entry(idx).or_default() += 1;
            }
        }
        let entries: Vec<(u32, f64)> = tf
            .into_iter()
            .map(|(idx, count)| (idx, count as f64 * self.idf(idx)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return SparseVector::default();
        }
        SparseVector {
            entries: entries.into_iter().map(|(i, w)| (i, w / norm)).collect(),
        }
    }

    pub fn vectorize(&self, doc: &Document) -> SparseVector {
        self.vectorize_text(&doc.text)
    }
}

/// Sorted `(index, weight)` pairs with non-negative finite weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds a vector from entries in any order; duplicate indices are summed.
    pub fn from_entries(mut entries: Vec<(u32, f64)>) -> Result<Self> {
        if let Some(&(i, w)) = entries.iter().find(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidValue(format!("weight {w} at index {i}")));
        }
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, w) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == i => *acc += w,
                _ => merged.push((i, w)),
            }
        }
        Ok(SparseVector { entries: merged })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|&(i, _)| i)
    }

    /// Inner product over matching indices.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        let mut sum = 0.0;
        while let (Some(&&(ia, wa)), Some(&&(ib, wb))) = (a.peek(), b.peek()) {
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += wa * wb;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<Document>,
    pub validation: Vec<Document>,
    pub test: Vec<Document>,
}

/// Shuffles with [`SplitMix64`] under `seed`, then takes
/// `floor(n * val_fraction)` documents for validation, the next
/// `floor(n * test_fraction)` for test, and the rest for training.
pub fn split_corpus(
    docs: &[Document],
    val_fraction: f64,
    test_fraction: f64,
    seed: u64,
) -> Result<CorpusSplit> {
    let valid = |f: f64| (0.0..1.0).contains(&f);
    if !valid(val_fraction) || !valid(test_fraction) || val_fraction + test_fraction >= 1.0 {
        return Err(Error::InvalidFractions {
            val: val_fraction,
            test: test_fraction,
        });
    }
    let n = docs.len();
    // Slack so that e.g. 0.29 * 100 lands on 29 rather than 28.
    let count = |f: f64| ((n as f64 * f) + 1e-9).floor() as usize;
    let (n_val, n_test) = (count(val_fraction), count(test_fraction));

    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let pick = |range: &[usize]| range.iter().map(|&i| docs[i].clone()).collect::<Vec<_>>();
    Ok(CorpusSplit {
        validation: pick(&order[..n_val]),
        test: pick(&order[n_val..n_val + n_test]),
        train: pick(&order[n_val + n_test..]),
    })
}
