//! Positive/negative training-set construction for a node classifier.
//!
//! Λ(c) is the set of training documents whose most specific class is `c`.
//! Every policy is expressed through the relation between a document's label
//! and the node being trained:
//!
//! | policy             | positives  | negatives                                  |
//! |--------------------|------------|--------------------------------------------|
//! | exclusive          | Λ(c)       | everything else                            |
//! | less-exclusive     | Λ(c)       | not in Λ(c) or below c                     |
//! | less-inclusive     | Λ(c), below| everything else                            |
//! | inclusive          | Λ(c), below| not in Λ(c), below c, or above c           |
//! | siblings           | Λ(c), below| labels at a sibling of c or below one      |
//! | exclusive-siblings | Λ(c)       | labels exactly at a sibling of c           |

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::taxonomy::{NodeId, NodeIdx, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Exclusive,
    LessExclusive,
    LessInclusive,
    Inclusive,
    Siblings,
    ExclusiveSiblings,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Exclusive,
        PolicyKind::LessExclusive,
        PolicyKind::LessInclusive,
        PolicyKind::Inclusive,
        PolicyKind::Siblings,
        PolicyKind::ExclusiveSiblings,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Exclusive => "exclusive",
            PolicyKind::LessExclusive => "less-exclusive",
            PolicyKind::LessInclusive => "less-inclusive",
            PolicyKind::Inclusive => "inclusive",
            PolicyKind::Siblings => "siblings",
            PolicyKind::ExclusiveSiblings => "exclusive-siblings",
        }
    }

    fn positive(self, rel: Relation) -> bool {
        match self {
            PolicyKind::Exclusive | PolicyKind::LessExclusive | PolicyKind::ExclusiveSiblings => {
                rel == Relation::Same
            }
            PolicyKind::LessInclusive | PolicyKind::Inclusive | PolicyKind::Siblings => {
                matches!(rel, Relation::Same | Relation::Descendant)
            }
        }
    }

    fn negative(self, rel: Relation) -> bool {
        match self {
            PolicyKind::Exclusive => rel != Relation::Same,
            PolicyKind::LessExclusive | PolicyKind::LessInclusive => {
                !matches!(rel, Relation::Same | Relation::Descendant)
            }
            PolicyKind::Inclusive => !matches!(
                rel,
                Relation::Same | Relation::Descendant | Relation::Ancestor
            ),
            PolicyKind::Siblings => {
                matches!(rel, Relation::Sibling | Relation::SiblingDescendant)
            }
            PolicyKind::ExclusiveSiblings => rel == Relation::Sibling,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown policy {s:?}")))
    }
}

/// Position of a document label relative to the trained node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Same,
    Descendant,
    Ancestor,
    Sibling,
    SiblingDescendant,
    Unrelated,
}

fn relation(t: &Taxonomy, node: NodeIdx, label: NodeIdx) -> Relation {
    if label == node {
        return Relation::Same;
    }
    if t.is_ancestor_idx(node, label) {
        return Relation::Descendant;
    }
    if t.is_ancestor_idx(label, node) {
        return Relation::Ancestor;
    }
    let parent = t.parent_idx(node);
    if parent.is_some() && t.parent_idx(label) == parent {
        return Relation::Sibling;
    }
    // Walk up from the label looking for a sibling of `node`.
    let mut cur = t.parent_idx(label);
    while let Some(a) = cur {
        if a != node && t.parent_idx(a) == parent {
            return Relation::SiblingDescendant;
        }
        cur = t.parent_idx(a);
    }
    Relation::Unrelated
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTrainingSet {
    pub node: NodeId,
    pub positives: BTreeSet<String>,
    pub negatives: BTreeSet<String>,
}

fn non_root_idx(t: &Taxonomy, node: &str) -> Result<NodeIdx> {
    let idx = t.idx(node)?;
    if idx == t.root_idx() {
        return Err(Error::RootNode(node.to_string()));
    }
    Ok(idx)
}

/// Λ(c): training documents labeled exactly `node`.
pub fn most_specific_examples(
    train: &[Document],
    t: &Taxonomy,
    node: &str,
) -> Result<BTreeSet<String>> {
    non_root_idx(t, node)?;
    Ok(train
        .iter()
        .filter(|d| d.label.as_str() == node)
        .map(|d| d.doc_id.clone())
        .collect())
}

pub fn build_training_set(
    train: &[Document],
    t: &Taxonomy,
    node: &str,
    policy: PolicyKind,
) -> Result<NodeTrainingSet> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let idx = non_root_idx(t, node)?;
    let mut positives = BTreeSet::new();
    let mut negatives = BTreeSet::new();
    for doc in train {
        let rel = relation(t, idx, t.idx(doc.label.as_str())?);
        if policy.positive(rel) {
            positives.insert(doc.doc_id.clone());
        } else if policy.negative(rel) {
            negatives.insert(doc.doc_id.clone());
        }
    }
    Ok(NodeTrainingSet {
        node: t.id(idx).clone(),
        positives,
        negatives,
    })
}

/// Λ(c) together with the documents labeled anywhere below `node`.
pub fn positives_for_centroid(
    train: &[Document],
    t: &Taxonomy,
    node: &str,
) -> Result<BTreeSet<String>> {
    let idx = non_root_idx(t, node)?;
    let mut out = BTreeSet::new();
    for doc in train {
        let label = t.idx(doc.label.as_str())?;
        if label == idx || t.is_ancestor_idx(idx, label) {
            out.insert(doc.doc_id.clone());
        }
    }
    Ok(out)
}
