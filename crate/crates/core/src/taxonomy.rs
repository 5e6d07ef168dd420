//! Rooted category tree and its relation queries.
//!
//! Nodes are stored in an arena indexed by [`NodeIdx`]; the public API accepts
//! node labels and the index form is available for hot loops.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable node label as read from the taxonomy file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() || label.contains(['\t', '\n', '\r']) {
            return Err(Error::InvalidValue(format!("invalid node id {label:?}")));
        }
        Ok(NodeId(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for NodeId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Arena index of a node inside one [`Taxonomy`].
pub type NodeIdx = usize;

/// Root-to-leaf path, root excluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub nodes: Vec<NodeId>,
}

impl Route {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf(&self) -> Option<&NodeId> {
        self.nodes.last()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    ids: Vec<NodeId>,
    index: HashMap<String, NodeIdx>,
    parent: Vec<Option<NodeIdx>>,
    children: Vec<Vec<NodeIdx>>,
    depth: Vec<usize>,
    root: NodeIdx,
}

impl Taxonomy {
    /// Parses `parent<TAB>child` edge lines. `#` comments and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ids: Vec<NodeId> = Vec::new();
        let mut index: HashMap<String, NodeIdx> = HashMap::new();
        let mut parent: Vec<Option<NodeIdx>> = Vec::new();
        let mut children: Vec<Vec<NodeIdx>> = Vec::new();
        let mut edges: HashSet<(NodeIdx, NodeIdx)> = HashSet::new();

        let mut intern = |ids: &mut Vec<NodeId>, label: &str, line: usize| -> Result<NodeIdx> {
            if let Some(&idx) = index.get(label) {
                return Ok(idx);
            }
            let id = NodeId::new(label).map_err(|_| Error::MalformedLine {
                line,
                reason: format!("invalid node label {label:?}"),
            })?;
            let idx = ids.len();
            ids.push(id);
            index.insert(label.to_string(), idx);
            Ok(idx)
        };

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            }
            let (p_label, c_label) = (fields[0].trim(), fields[1].trim());
            let p = intern(&mut ids, p_label, line)?;
            let c = intern(&mut ids, c_label, line)?;
            parent.resize(ids.len(), None);
            children.resize(ids.len(), Vec::new());
            if !edges.insert((p, c)) {
                return Err(Error::DuplicateEdge {
                    line,
                    parent: p_label.to_string(),
                    child: c_label.to_string(),
                });
            }
            if let Some(existing) = parent[c] {
                return Err(Error::TwoParents {
                    line,
                    child: c_label.to_string(),
                    first: ids[existing].to_string(),
                    second: p_label.to_string(),
                });
            }
            parent[c] = Some(p);
            children[p].push(c);
        }

        if ids.is_empty() {
            return Err(Error::EmptyTaxonomy);
        }

        // Every node has at most one parent, so a cycle shows up as a revisit
        // while walking parent links.
        let n = ids.len();
        let mut state = vec![0u8; n]; // 0 = unseen, 1 = on current walk, 2 = done
        for start in 0..n {
            let mut walk = Vec::new();
            let mut cur = Some(start);
            while let Some(node) = cur {
                match state[node] {
                    2 => break,
                    1 => return Err(Error::Cycle(ids[node].to_string())),
                    _ => {
                        state[node] = 1;
                        walk.push(node);
                        cur = parent[node];
                    }
                }
            }
            for node in walk {
                state[node] = 2;
            }
        }

        let roots: Vec<NodeIdx> = (0..n).filter(|&i| parent[i].is_none()).collect();
        let root = match roots.as_slice() {
            [] => return Err(Error::NoRoot),
            [r] => *r,
            many => {
                return Err(Error::MultipleRoots(
                    many.iter().map(|&i| ids[i].to_string()).collect(),
                ))
            }
        };

        let mut depth = vec![0usize; n];
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            for &child in &children[node] {
                depth[child] = depth[node] + 1;
                stack.push(child);
            }
        }

        let index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str().to_string(), i))
            .collect();
        Ok(Taxonomy {
            ids,
            index,
            parent,
            children,
            depth,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn root(&self) -> &NodeId {
        &self.ids[self.root]
    }

    pub fn root_idx(&self) -> NodeIdx {
        self.root
    }

    pub fn idx(&self, node: &str) -> Result<NodeIdx> {
        self.index
            .get(node)
            .copied()
            .ok_or_else(|| Error::UnknownNode(node.to_string()))
    }

    pub fn contains(&self, node: &str) -> bool {
        self.index.contains_key(node)
    }

    pub fn id(&self, idx: NodeIdx) -> &NodeId {
        &self.ids[idx]
    }

    pub fn parent_idx(&self, idx: NodeIdx) -> Option<NodeIdx> {
        self.parent[idx]
    }

    pub fn children_idx(&self, idx: NodeIdx) -> &[NodeIdx] {
        &self.children[idx]
    }

    pub fn depth_idx(&self, idx: NodeIdx) -> usize {
        self.depth[idx]
    }

    pub fn is_leaf_idx(&self, idx: NodeIdx) -> bool {
        self.children[idx].is_empty()
    }

    pub fn parent(&self, node: &str) -> Result<Option<&NodeId>> {
        let idx = self.idx(node)?;
        Ok(self.parent[idx].map(|p| &self.ids[p]))
    }

    pub fn children(&self, node: &str) -> Result<Vec<&NodeId>> {
        let idx = self.idx(node)?;
        Ok(self.children[idx].iter().map(|&c| &self.ids[c]).collect())
    }

    pub fn depth(&self, node: &str) -> Result<usize> {
        Ok(self.depth[self.idx(node)?])
    }

    pub fn is_leaf(&self, node: &str) -> Result<bool> {
        Ok(self.is_leaf_idx(self.idx(node)?))
    }

    pub fn max_depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Pre-order traversal from the root in child order.
    pub fn preorder(&self) -> Vec<NodeIdx> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(self.children[node].iter().rev());
        }
        out
    }

    /// Non-root nodes in pre-order.
    pub fn non_root_nodes(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.preorder().into_iter().skip(1)
    }

    /// Leaves in pre-order (left to right).
    pub fn leaves(&self) -> Vec<NodeIdx> {
        self.preorder()
            .into_iter()
            .filter(|&i| i != self.root && self.is_leaf_idx(i))
            .collect()
    }

    /// Strict ancestors, root included, nearest first.
    pub fn ancestors_idx(&self, idx: NodeIdx) -> Vec<NodeIdx> {
        let mut out = Vec::new();
        let mut cur = self.parent[idx];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent[p];
        }
        out
    }

    pub fn descendants_idx(&self, idx: NodeIdx) -> Vec<NodeIdx> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeIdx> = self.children[idx].iter().rev().copied().collect();
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(self.children[node].iter().rev());
        }
        out
    }

    pub fn siblings_idx(&self, idx: NodeIdx) -> Option<Vec<NodeIdx>> {
        let p = self.parent[idx]?;
        Some(
            self.children[p]
                .iter()
                .copied()
                .filter(|&c| c != idx)
                .collect(),
        )
    }

    /// True when `ancestor` is a strict ancestor of `node`.
    pub fn is_ancestor_idx(&self, ancestor: NodeIdx, node: NodeIdx) -> bool {
        let mut cur = self.parent[node];
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.parent[p];
        }
        false
    }

    pub fn ancestors(&self, node: &str) -> Result<BTreeSet<NodeId>> {
        let idx = self.idx(node)?;
        Ok(self.to_ids(self.ancestors_idx(idx)))
    }

    pub fn descendants(&self, node: &str) -> Result<BTreeSet<NodeId>> {
        let idx = self.idx(node)?;
        Ok(self.to_ids(self.descendants_idx(idx)))
    }

    pub fn siblings(&self, node: &str) -> Result<BTreeSet<NodeId>> {
        let idx = self.idx(node)?;
        let sibs = self
            .siblings_idx(idx)
            .ok_or_else(|| Error::RootNode(node.to_string()))?;
        Ok(self.to_ids(sibs))
    }

    /// Path below the root ending at `idx` (which need not be a leaf).
    pub fn path_idx(&self, idx: NodeIdx) -> Vec<NodeIdx> {
        let mut path: Vec<NodeIdx> = std::iter::once(idx)
            .chain(self.ancestors_idx(idx))
            .filter(|&n| n != self.root)
            .collect();
        path.reverse();
        path
    }

    pub fn route_to(&self, leaf: &str) -> Result<Route> {
        let idx = self.idx(leaf)?;
        if idx == self.root || !self.is_leaf_idx(idx) {
            return Err(Error::NotALeaf(leaf.to_string()));
        }
        Ok(Route {
            nodes: self
                .path_idx(idx)
                .into_iter()
                .map(|i| self.ids[i].clone())
                .collect(),
        })
    }

    /// Renders the edge list in the file format (pre-order, child order).
    pub fn to_edge_text(&self) -> String {
        let mut out = String::new();
        for node in self.preorder() {
            for &child in &self.children[node] {
                out.push_str(self.ids[node].as_str());
                out.push('\t');
                out.push_str(self.ids[child].as_str());
                out.push('\n');
            }
        }
        out
    }

    fn to_ids(&self, nodes: Vec<NodeIdx>) -> BTreeSet<NodeId> {
        nodes.into_iter().map(|i| self.ids[i].clone()).collect()
    }
}
