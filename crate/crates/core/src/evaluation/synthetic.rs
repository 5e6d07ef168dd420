//! Seeded hierarchical corpora with known structure.
//!
//! Every non-root node owns `topic_vocab` marker terms. A document of leaf `l`
//! draws each token independently: with probability `noise` it is a uniform
//! pick from the shared noise vocabulary, otherwise it is a topical token.
//! Topical tokens cycle through the route of `l` from the top level down, each
//! one a uniform pick from that node's markers, so a document with at least
//! `depth` topical tokens mentions every node on its route. Upper levels are
//! covered first, which leaves the deepest decisions the most error-prone.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub depth: usize,
    pub branching: usize,
    /// Marker terms owned by each node.
    pub topic_vocab: usize,
    pub noise_vocab: usize,
    pub docs_per_leaf: usize,
    pub tokens_per_doc: usize,
    /// Probability that a token comes from the noise vocabulary.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            depth: 3,
            branching: 3,
            topic_vocab: 3,
            noise_vocab: 100,
            docs_per_leaf: 50,
            tokens_per_doc: 8,
            noise: 0.0,
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("depth", self.depth),
            ("branching", self.branching),
            ("topic_vocab", self.topic_vocab),
            ("noise_vocab", self.noise_vocab),
            ("docs_per_leaf", self.docs_per_leaf),
            ("tokens_per_doc", self.tokens_per_doc),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::InvalidSyntheticSpec(format!(
                "{name} must be at least 1"
            )));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return Err(Error::InvalidSyntheticSpec(format!(
                "noise {} outside [0, 1)",
                self.noise
            )));
        }
        let leaves = (self.branching as u128).checked_pow(self.depth as u32);
        if leaves.is_none_or(|l| l * self.docs_per_leaf as u128 > 50_000_000) {
            return Err(Error::InvalidSyntheticSpec("corpus too large".into()));
        }
        Ok(())
    }

    pub fn leaf_count(&self) -> usize {
        self.branching.pow(self.depth as u32)
    }
}

/// Taxonomy and corpus file contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub taxonomy: String,
    pub corpus: String,
}

struct Node {
    name: String,
    /// Pre-order number, used to name marker terms.
    ordinal: usize,
    route: Vec<usize>,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;

    // Build the complete tree in pre-order.
    let mut nodes: Vec<Node> = Vec::new();
    let mut taxonomy = String::new();
    let mut leaves = Vec::new();
    let mut stack: Vec<(Option<usize>, Vec<usize>)> = vec![(None, Vec::new())];
    while let Some((parent, path)) = stack.pop() {
        let (name, route) = match parent {
            None => ("ROOT".to_string(), Vec::new()),
            Some(p) => {
                let name = format!(
                    "n{}",
                    path.iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join("-")
                );
                writeln!(taxonomy, "{}\t{}", nodes[p].name, name).unwrap();
                let mut route = nodes[p].route.clone();
                route.push(nodes.len());
                (name, route)
            }
        };
        let idx = nodes.len();
        nodes.push(Node {
            name,
            ordinal: idx,
            route,
        });
        if path.len() == spec.depth {
            leaves.push(idx);
            continue;
        }
        for b in (0..spec.branching).rev() {
            let mut child = path.clone();
            child.push(b);
            stack.push((Some(idx), child));
        }
    }

    let mut rng = SplitMix64::new(spec.seed);
    let mut corpus = String::new();
    let mut doc_no = 0usize;
    let width = (spec.leaf_count() * spec.docs_per_leaf).to_string().len();
    for &leaf in &leaves {
        let route = &nodes[leaf].route;
        for _ in 0..spec.docs_per_leaf {
            let mut tokens = Vec::with_capacity(spec.tokens_per_doc);
            let mut topical = 0usize;
            for _ in 0..spec.tokens_per_doc {
                if rng.unit() < spec.noise {
                    tokens.push(format!("noise{}", rng.below(spec.noise_vocab)));
                } else {
                    let node = &nodes[route[topical % route.len()]];
                    topical += 1;
                    tokens.push(format!("t{}w{}", node.ordinal, rng.below(spec.topic_vocab)));
                }
            }
            writeln!(
                corpus,
                "doc{doc_no:0width$}\t{}\t{}",
                nodes[leaf].name,
                tokens.join(" ")
            )
            .unwrap();
            doc_no += 1;
        }
    }

    Ok(SyntheticCorpus { taxonomy, corpus })
}
