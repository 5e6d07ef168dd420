//! Random taxonomies and a naive policy oracle built straight from edge lists.

#![allow(dead_code)]

use std::collections::BTreeSet;

use routeconf::{Document, NodeId, PolicyKind};

/// A random tree as `(parent, child)` index pairs; node 0 is the root.
///
/// `choices[i]` picks the parent of node `i + 1` among the earlier nodes whose
/// depth is below `max_depth`.
pub fn random_edges(choices: &[u32], max_depth: usize) -> Vec<(usize, usize)> {
    let mut depth = vec![0usize];
    let mut edges = Vec::new();
    for (i, &c) in choices.iter().enumerate() {
        let open: Vec<usize> = (0..=i).filter(|&p| depth[p] < max_depth).collect();
        let parent = open[c as usize % open.len()];
        depth.push(depth[parent] + 1);
        edges.push((parent, i + 1));
    }
    edges
}

pub fn node_name(i: usize) -> String {
    if i == 0 {
        "ROOT".into()
    } else {
        format!("c{i}")
    }
}

pub fn edge_text(edges: &[(usize, usize)]) -> String {
    edges
        .iter()
        .map(|&(p, c)| format!("{}\t{}\n", node_name(p), node_name(c)))
        .collect()
}

/// Documents `d0, d1, ...` labeled with `node_name(label)`; labels must be non-root.
pub fn labeled_docs(labels: &[usize]) -> Vec<Document> {
    labels
        .iter()
        .enumerate()
        .map(|(k, &l)| Document {
            doc_id: format!("d{k}"),
            label: NodeId::new(node_name(l)).unwrap(),
            text: String::new(),
        })
        .collect()
}

/// Relation closures over raw edges.
pub struct Naive {
    pub n: usize,
    pub parent: Vec<Option<usize>>,
}

impl Naive {
    pub fn new(edges: &[(usize, usize)]) -> Self {
        let n = edges.len() + 1;
        let mut parent = vec![None; n];
        for &(p, c) in edges {
            parent[c] = Some(p);
        }
        Naive { n, parent }
    }

    pub fn ancestors(&self, c: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut cur = self.parent[c];
        while let Some(p) = cur {
            out.insert(p);
            cur = self.parent[p];
        }
        out
    }

    pub fn descendants(&self, c: usize) -> BTreeSet<usize> {
        (0..self.n)
            .filter(|&x| self.ancestors(x).contains(&c))
            .collect()
    }

    pub fn siblings(&self, c: usize) -> BTreeSet<usize> {
        (0..self.n)
            .filter(|&x| x != c && self.parent[x].is_some() && self.parent[x] == self.parent[c])
            .collect()
    }

    /// `(positives, negatives)` by direct set comprehension over the policy
    /// formulas, with doc-level lifting of the category sets.
    pub fn policy(
        &self,
        labels: &[usize],
        c: usize,
        p: PolicyKind,
    ) -> (BTreeSet<String>, BTreeSet<String>) {
        let docs_in = |cats: &BTreeSet<usize>| -> BTreeSet<String> {
            labels
                .iter()
                .enumerate()
                .filter(|(_, l)| cats.contains(l))
                .map(|(k, _)| format!("d{k}"))
                .collect()
        };
        let all: BTreeSet<String> = (0..labels.len()).map(|k| format!("d{k}")).collect();
        let lambda = docs_in(&BTreeSet::from([c]));
        let down = docs_in(&self.descendants(c));
        let up = docs_in(&self.ancestors(c));
        let sibs = self.siblings(c);
        let sib = docs_in(&sibs);
        let sib_down = docs_in(&sibs.iter().flat_map(|&s| self.descendants(s)).collect());

        let union = |a: &BTreeSet<String>, b: &BTreeSet<String>| a | b;
        let minus = |a: &BTreeSet<String>, b: &BTreeSet<String>| a - b;
        match p {
            PolicyKind::Exclusive => (lambda.clone(), minus(&all, &lambda)),
            PolicyKind::LessExclusive => (lambda.clone(), minus(&minus(&all, &lambda), &down)),
            PolicyKind::LessInclusive => {
                let pos = union(&lambda, &down);
                let neg = minus(&all, &pos);
                (pos, neg)
            }
            PolicyKind::Inclusive => (
                union(&lambda, &down),
                minus(&minus(&minus(&all, &lambda), &down), &up),
            ),
            PolicyKind::Siblings => (union(&lambda, &down), union(&sib, &sib_down)),
            PolicyKind::ExclusiveSiblings => (lambda, sib),
        }
    }
}
