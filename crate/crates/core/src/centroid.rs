//! Rocchio prototypes: one mean vector per taxonomy node, scored by inner product.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, SparseVector, Vocabulary};
use crate::error::{Error, Result};
use crate::policies::{build_training_set, positives_for_centroid, PolicyKind};
use crate::taxonomy::{NodeId, Taxonomy};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentroidMode {
    /// Prototype of the node's own documents and everything below it.
    #[default]
    PositiveOnly,
    /// Positive and negative prototypes from a training policy; the score is
    /// the clamped difference of the two similarities.
    Binary,
}

impl CentroidMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CentroidMode::PositiveOnly => "positive-only",
            CentroidMode::Binary => "binary",
        }
    }
}

impl fmt::Display for CentroidMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CentroidMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive-only" => Ok(CentroidMode::PositiveOnly),
            "binary" => Ok(CentroidMode::Binary),
            _ => Err(Error::InvalidValue(format!("unknown centroid mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeCentroid {
    pub positive: SparseVector,
    /// Present in binary mode only.
    pub negative: Option<SparseVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    vocabulary: Vocabulary,
    mode: CentroidMode,
    policy: Option<PolicyKind>,
    centroids: BTreeMap<NodeId, NodeCentroid>,
}

/// Inner product of a document vector and a prototype.
pub fn similarity(doc: &SparseVector, centroid: &SparseVector) -> f64 {
    doc.dot(centroid)
}

/// Mean of the vectors for `members`; empty membership gives the empty vector.
///
/// Each index keeps a running mean of its non-zero contributions, visited in
/// ascending doc_id order, and is then scaled by the fraction of members that
/// contributed. The result equals the plain mean, and averaging k copies of a
/// vector returns that vector bit-for-bit.
pub fn mean_vector(
    members: &BTreeSet<String>,
    vectors: &HashMap<&str, &SparseVector>,
) -> SparseVector {
    if members.is_empty() {
        return SparseVector::default();
    }
    let mut acc: BTreeMap<u32, (f64, u32)> = BTreeMap::new();
    for id in members {
        if let Some(vec) = vectors.get(id.as_str()) {
            for &(i, w) in vec.entries() {
                let (mean, count) = acc.entry(i).or_insert((0.0, 0));
                *count += 1;
                *mean += (w - *mean) / *count as f64;
            }
        }
    }
    let n = members.len() as f64;
    SparseVector::from_entries(
        acc.into_iter()
            .map(|(i, (mean, count))| (i, mean * (count as f64 / n)))
            .collect(),
    )
    .expect("mean of non-negative finite weights")
}

impl CentroidModel {
    pub fn train(
        train: &[Document],
        t: &Taxonomy,
        vocabulary: Vocabulary,
        mode: CentroidMode,
        policy: Option<PolicyKind>,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let policy = match mode {
            CentroidMode::Binary => Some(policy.ok_or(Error::MissingPolicy)?),
            CentroidMode::PositiveOnly => None,
        };
        let doc_vectors: Vec<SparseVector> =
            train.par_iter().map(|d| vocabulary.vectorize(d)).collect();
        let by_id: HashMap<&str, &SparseVector> = train
            .iter()
            .zip(&doc_vectors)
            .map(|(d, v)| (d.doc_id.as_str(), v))
            .collect();

        let nodes: Vec<NodeId> = t.non_root_nodes().map(|i| t.id(i).clone()).collect();
        let centroids = nodes
            .par_iter()
            .map(|node| -> Result<(NodeId, NodeCentroid)> {
                let centroid = match policy {
                    None => NodeCentroid {
                        positive: mean_vector(
                            &positives_for_centroid(train, t, node.as_str())?,
                            &by_id,
                        ),
                        negative: None,
                    },
                    Some(p) => {
                        let set = build_training_set(train, t, node.as_str(), p)?;
                        NodeCentroid {
                            positive: mean_vector(&set.positives, &by_id),
                            negative: Some(mean_vector(&set.negatives, &by_id)),
                        }
                    }
                };
                Ok((node.clone(), centroid))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;

        Ok(CentroidModel {
            vocabulary,
            mode,
            policy,
            centroids,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn mode(&self) -> CentroidMode {
        self.mode
    }

    pub fn policy(&self) -> Option<PolicyKind> {
        self.policy
    }

    pub fn centroids(&self) -> &BTreeMap<NodeId, NodeCentroid> {
        &self.centroids
    }

    pub fn centroid(&self, node: &str) -> Result<&NodeCentroid> {
        self.centroids
            .get(node)
            .ok_or_else(|| Error::UnknownNode(node.to_string()))
    }

    pub fn vectorize(&self, doc: &Document) -> SparseVector {
        self.vocabulary.vectorize(doc)
    }

    /// Unnormalized posterior of `node` for a document vector.
    pub fn score(&self, centroid: &NodeCentroid, doc: &SparseVector) -> f64 {
        let pos = similarity(doc, &centroid.positive);
        match (self.mode, &centroid.negative) {
            (CentroidMode::Binary, Some(neg)) => (pos - similarity(doc, neg)).max(0.0),
            _ => pos,
        }
    }

    pub fn node_score(&self, doc: &SparseVector, node: &str) -> Result<f64> {
        Ok(self.score(self.centroid(node)?, doc))
    }

    /// Checks that the model has a centroid for exactly the non-root nodes of `t`.
    pub fn check_taxonomy(&self, t: &Taxonomy) -> Result<()> {
        let expected: BTreeSet<&str> = t.non_root_nodes().map(|i| t.id(i).as_str()).collect();
        let found: BTreeSet<&str> = self.centroids.keys().map(NodeId::as_str).collect();
        if expected != found {
            let missing: Vec<&&str> = expected.difference(&found).take(3).collect();
            let extra: Vec<&&str> = found.difference(&expected).take(3).collect();
            return Err(Error::TaxonomyMismatch(format!(
                "missing centroids {missing:?}, unexpected centroids {extra:?}"
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            mode: self.mode,
            policy: self.policy,
            vocabulary: VocabularyFile {
                n_docs: self.vocabulary.n_docs(),
                terms: self
                    .vocabulary
                    .terms()
                    .iter()
                    .enumerate()
                    .map(|(i, term)| TermEntry {
                        term: term.clone(),
                        index: i as u32,
                        df: self.vocabulary.df(i as u32),
                    })
                    .collect(),
            },
            centroids: self
                .centroids
                .iter()
                .map(|(id, c)| {
                    (
                        id.as_str().to_string(),
                        CentroidEntry {
                            positive: encode_vector(&c.positive),
                            negative: c.negative.as_ref().map(encode_vector),
                        },
                    )
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&file)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: header.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let file: ModelFile = serde_json::from_str(text)?;
        if file.mode == CentroidMode::Binary && file.policy.is_none() {
            return Err(Error::MissingPolicy);
        }
        let mut terms = Vec::with_capacity(file.vocabulary.terms.len());
        let mut df = Vec::with_capacity(file.vocabulary.terms.len());
        for (pos, entry) in file.vocabulary.terms.into_iter().enumerate() {
            if entry.index as usize != pos {
                return Err(Error::VocabularyMismatch(format!(
                    "term {} has index {}, expected {pos}",
                    entry.term, entry.index
                )));
            }
            terms.push(entry.term);
            df.push(entry.df);
        }
        let vocabulary = Vocabulary::from_parts(terms, df, file.vocabulary.n_docs)?;
        let dim = vocabulary.len() as u32;

        let mut centroids = BTreeMap::new();
        for (node, entry) in file.centroids {
            let positive = decode_vector(&entry.positive, dim)?;
            let negative = entry
                .negative
                .as_ref()
                .map(|v| decode_vector(v, dim))
                .transpose()?;
            if (file.mode == CentroidMode::Binary) != negative.is_some() {
                return Err(Error::InvalidValue(format!(
                    "centroid {node}: negative prototype does not match mode {}",
                    file.mode
                )));
            }
            centroids.insert(NodeId::new(node)?, NodeCentroid { positive, negative });
        }
        Ok(CentroidModel {
            vocabulary,
            mode: file.mode,
            policy: file.policy,
            centroids,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    mode: CentroidMode,
    policy: Option<PolicyKind>,
    vocabulary: VocabularyFile,
    centroids: BTreeMap<String, CentroidEntry>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyFile {
    n_docs: u32,
    terms: Vec<TermEntry>,
}

#[derive(Serialize, Deserialize)]
struct TermEntry {
    term: String,
    index: u32,
    df: u32,
}

#[derive(Serialize, Deserialize)]
struct CentroidEntry {
    positive: Vec<(u32, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    negative: Option<Vec<(u32, String)>>,
}

// `Display` for f64 is the shortest string that parses back to the same value.
fn encode_vector(v: &SparseVector) -> Vec<(u32, String)> {
    v.entries()
        .iter()
        .map(|&(i, w)| (i, w.to_string()))
        .collect()
}

fn decode_vector(entries: &[(u32, String)], dim: u32) -> Result<SparseVector> {
    let mut out = Vec::with_capacity(entries.len());
    let mut prev: Option<u32> = None;
    for (i, w) in entries {
        if *i >= dim {
            return Err(Error::VocabularyMismatch(format!(
                "centroid index {i} outside vocabulary of size {dim}"
            )));
        }
        if prev.is_some_and(|p| p >= *i) {
            return Err(Error::InvalidValue(format!(
                "centroid indices not increasing at {i}"
            )));
        }
        prev = Some(*i);
        let w: f64 = w
            .parse()
            .map_err(|_| Error::InvalidValue(format!("bad weight {w:?}")))?;
        out.push((*i, w));
    }
    SparseVector::from_entries(out)
}
