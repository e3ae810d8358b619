//! Annotated source graphs and the graph-level apply/modify operations.
//!
//! An [`AsGraph`] is a rooted, node- and edge-labeled directed graph in
//! which some nodes are designated as named sources (open argument slots),
//! each optionally annotated with the [`AmType`] it demands of whatever
//! fills it. Values are immutable: every operation builds a fresh graph
//! with fresh node ids, and equality is isomorphism, never id identity.

mod iso;
mod penman;

pub use penman::{parse as parse_penman, parse_asgraph, render_amr, render_asgraph, ParseError, PenmanMode};

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::amtypes::{
    apply_type_checked, modify_type_checked, AmType, SourceName, TypeDefect,
};

pub type NodeId = usize;

/// A directed labeled edge. Labels are stored in base form; an inverse
/// role like `ARG0-of` is normalized to `ARG0` with swapped endpoints at
/// parse time.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    Empty,
    #[error("node id {0} out of range")]
    NodeOutOfRange(NodeId),
    #[error("duplicate edge {from} -{label}-> {to}")]
    DuplicateEdge {
        from: NodeId,
        to: NodeId,
        label: String,
    },
    #[error("node {node} carries two source names ({a} and {b})")]
    SourceNotInjective {
        node: NodeId,
        a: SourceName,
        b: SourceName,
    },
    #[error("annotation on {0} which is not a source")]
    AnnotationWithoutSource(SourceName),
    #[error("graph is not connected (node {0} unreachable ignoring direction)")]
    Disconnected(NodeId),
}

/// Why a graph-level apply/modify failed.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("{0}")]
    Type(TypeDefect),
    #[error("label conflict on unification: {a:?} vs {b:?}")]
    LabelConflict { a: String, b: String },
    #[error("duplicate-edge collision after fusion: {from}->{to} with labels {a:?} and {b:?}")]
    DuplicateEdgeCollision {
        from: NodeId,
        to: NodeId,
        a: String,
        b: String,
    },
    #[error("internal graph invariant breach: {0}")]
    Graph(#[from] GraphError),
}

/// A rooted graph with named, optionally annotated source nodes.
#[derive(Clone, Debug)]
pub struct AsGraph {
    labels: Vec<Option<String>>,
    edges: Vec<Edge>,
    root: NodeId,
    sources: BTreeMap<SourceName, NodeId>,
    annotations: BTreeMap<SourceName, AmType>,
}

impl AsGraph {
    /// Validates all structural invariants and canonicalizes edge order.
    /// Empty-type annotations are dropped (absence means `()`).
    pub fn new(
        labels: Vec<Option<String>>,
        mut edges: Vec<Edge>,
        root: NodeId,
        sources: BTreeMap<SourceName, NodeId>,
        annotations: BTreeMap<SourceName, AmType>,
    ) -> Result<Self, GraphError> {
        let n = labels.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if root >= n {
            return Err(GraphError::NodeOutOfRange(root));
        }
        edges.sort();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge {
                    from: w[0].from,
                    to: w[0].to,
                    label: w[0].label.clone(),
                });
            }
        }
        for e in &edges {
            if e.from >= n {
                return Err(GraphError::NodeOutOfRange(e.from));
            }
            if e.to >= n {
                return Err(GraphError::NodeOutOfRange(e.to));
            }
        }
        let mut seen: HashMap<NodeId, &SourceName> = HashMap::new();
        for (name, &node) in &sources {
            if node >= n {
                return Err(GraphError::NodeOutOfRange(node));
            }
            if let Some(prev) = seen.insert(node, name) {
                return Err(GraphError::SourceNotInjective {
                    node,
                    a: prev.clone(),
                    b: name.clone(),
                });
            }
        }
        for name in annotations.keys() {
            if !sources.contains_key(name) {
                return Err(GraphError::AnnotationWithoutSource(name.clone()));
            }
        }
        let annotations: BTreeMap<SourceName, AmType> = annotations
            .into_iter()
            .filter(|(_, t)| !t.is_empty())
            .collect();

        // Connectivity ignoring direction.
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for e in &edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut visited = vec![false; n];
        let mut stack = vec![root];
        visited[root] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !visited[v] {
                    visited[v] = true;
                    stack.push(v);
                }
            }
        }
        if let Some(u) = visited.iter().position(|v| !v) {
            return Err(GraphError::Disconnected(u));
        }

        Ok(AsGraph {
            labels,
            edges,
            root,
            sources,
            annotations,
        })
    }

    /// A single-node graph, labeled or a bare source placeholder.
    pub fn single_node(label: Option<String>) -> Self {
        AsGraph {
            labels: vec![label],
            edges: Vec::new(),
            root: 0,
            sources: BTreeMap::new(),
            annotations: BTreeMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, node: NodeId) -> Option<&str> {
        self.labels[node].as_deref()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn sources(&self) -> &BTreeMap<SourceName, NodeId> {
        &self.sources
    }

    /// The source name carried by `node`, if any.
    pub fn source_of_node(&self, node: NodeId) -> Option<&SourceName> {
        self.sources
            .iter()
            .find_map(|(name, &id)| (id == node).then_some(name))
    }

    /// The annotation of source `name`; defaults to the empty type.
    pub fn annotation(&self, name: &SourceName) -> AmType {
        self.annotations
            .get(name)
            .cloned()
            .unwrap_or_else(AmType::empty)
    }

    /// The type of this graph: its sources with their annotations.
    /// Never `_|_`; graphs for contentless tokens are represented by the
    /// absence of a graph, not by a bottom graph.
    pub fn type_of(&self) -> AmType {
        AmType::Map(
            self.sources
                .keys()
                .map(|name| (name.clone(), self.annotation(name)))
                .collect(),
        )
    }

    /// Relabels a single node, keeping everything else. Used for
    /// delexicalization; does not touch structure, so no revalidation.
    pub fn with_node_label(&self, node: NodeId, label: Option<String>) -> Self {
        let mut g = self.clone();
        g.labels[node] = label;
        g
    }

    /// Finds the unique node carrying `label`, if exactly one exists.
    pub fn find_labeled_node(&self, label: &str) -> Option<NodeId> {
        let mut found = None;
        for (id, l) in self.labels.iter().enumerate() {
            if l.as_deref() == Some(label) {
                if found.is_some() {
                    return None;
                }
                found = Some(id);
            }
        }
        found
    }

    /// Graph-level apply: plug the root of `arg` into the `a`-source of
    /// `self`, unifying any shared source names. The result's root is this
    /// graph's root; `a` is consumed.
    pub fn apply(&self, a: &SourceName, arg: &AsGraph) -> Result<AsGraph, OpError> {
        let result_type =
            apply_type_checked(&self.type_of(), a, &arg.type_of()).map_err(OpError::Type)?;
        let a_node = self.sources[a];
        let mut fusions = vec![(a_node, arg.root)];
        for (name, &node) in &self.sources {
            if name != a {
                if let Some(&other) = arg.sources.get(name) {
                    fusions.push((node, other));
                }
            }
        }
        let mut result_sources: BTreeMap<SourceName, Side> = BTreeMap::new();
        for (name, &node) in &self.sources {
            if name != a {
                result_sources.insert(name.clone(), Side::Head(node));
            }
        }
        for (name, &node) in &arg.sources {
            result_sources
                .entry(name.clone())
                .or_insert(Side::Arg(node));
        }
        fuse(self, arg, self.root, &fusions, result_sources, result_type)
    }

    /// Graph-level modify: plug the root of `self` into the `a`-source of
    /// the modifier. The result's root stays this graph's root even though
    /// the modifier may add incoming edges to it, and the type is unchanged.
    pub fn modify(&self, a: &SourceName, modifier: &AsGraph) -> Result<AsGraph, OpError> {
        let result_type =
            modify_type_checked(&self.type_of(), a, &modifier.type_of()).map_err(OpError::Type)?;
        let a_node = modifier.sources[a];
        let mut fusions = vec![(self.root, a_node)];
        for (name, &node) in &modifier.sources {
            if name != a {
                // Present in the head by the type check above.
                fusions.push((self.sources[name], node));
            }
        }
        let result_sources: BTreeMap<SourceName, Side> = self
            .sources
            .iter()
            .map(|(name, &node)| (name.clone(), Side::Head(node)))
            .collect();
        fuse(self, modifier, self.root, &fusions, result_sources, result_type)
    }

    /// True iff some node bijection preserves labels, edges, root, source
    /// names and annotations.
    pub fn is_isomorphic(&self, other: &AsGraph) -> bool {
        iso::is_isomorphic(self, other)
    }

    /// A total node order that depends only on the isomorphism class.
    pub(crate) fn canonical_order(&self) -> Vec<usize> {
        iso::canonical_order(self)
    }

    /// The graph with all source markings and annotations removed, as used
    /// for evaluation output comparison.
    pub fn strip_sources(&self) -> AsGraph {
        let mut g = self.clone();
        g.sources.clear();
        g.annotations.clear();
        g
    }
}

/// Rendering is canonical, so display equality implies isomorphism.
impl std::fmt::Display for AsGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render_asgraph(self))
    }
}

impl PartialEq for AsGraph {
    fn eq(&self, other: &Self) -> bool {
        self.is_isomorphic(other)
    }
}

impl Eq for AsGraph {}

#[derive(Clone, Copy, Debug)]
enum Side {
    Head(NodeId),
    Arg(NodeId),
}

/// Builds the fused graph for apply/modify.
///
/// `fusions` lists (head node, other node) pairs to be identified. Fused
/// node groups must not contain two distinct labels, and two edges from
/// different pre-fusion endpoint pairs must not land on the same endpoint
/// pair with different labels; identical triples collapse into one.
fn fuse(
    head: &AsGraph,
    other: &AsGraph,
    result_root: NodeId,
    fusions: &[(NodeId, NodeId)],
    result_sources: BTreeMap<SourceName, Side>,
    result_type: AmType,
) -> Result<AsGraph, OpError> {
    let nh = head.node_count();
    let total = nh + other.node_count();
    // Union-find over head nodes [0, nh) and other nodes [nh, total).
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(h, o) in fusions {
        let a = find(&mut parent, h);
        let b = find(&mut parent, nh + o);
        if a != b {
            parent[b] = a;
        }
    }

    // Assign fresh ids in first-encounter order; merge labels.
    let mut class_id: HashMap<usize, NodeId> = HashMap::new();
    let mut labels: Vec<Option<String>> = Vec::new();
    let mut lookup = |parent: &mut Vec<usize>,
                      labels: &mut Vec<Option<String>>,
                      old: usize,
                      label: Option<&String>|
     -> Result<NodeId, OpError> {
        let rep = find(parent, old);
        let id = *class_id.entry(rep).or_insert_with(|| {
            labels.push(None);
            labels.len() - 1
        });
        if let Some(l) = label {
            match &labels[id] {
                Some(existing) if existing != l => {
                    return Err(OpError::LabelConflict {
                        a: existing.clone(),
                        b: l.clone(),
                    })
                }
                _ => labels[id] = Some(l.clone()),
            }
        }
        Ok(id)
    };

    let mut node_map = vec![0usize; total];
    for u in 0..nh {
        node_map[u] = lookup(&mut parent, &mut labels, u, head.labels[u].as_ref())?;
    }
    for u in 0..other.node_count() {
        node_map[nh + u] = lookup(&mut parent, &mut labels, nh + u, other.labels[u].as_ref())?;
    }

    // Remap edges; collapse identical triples, reject newly-parallel edges
    // with differing labels.
    let mut edge_origin: HashMap<(NodeId, NodeId, String), (NodeId, NodeId)> = HashMap::new();
    let mut pair_labels: HashMap<(NodeId, NodeId), Vec<(String, (NodeId, NodeId))>> =
        HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut push_edge = |edges: &mut Vec<Edge>,
                         from: NodeId,
                         to: NodeId,
                         label: &str,
                         orig: (NodeId, NodeId)|
     -> Result<(), OpError> {
        let key = (from, to, label.to_string());
        if edge_origin.contains_key(&key) {
            return Ok(()); // identical duplicate collapses
        }
        if let Some(existing) = pair_labels.get(&(from, to)) {
            for (other_label, other_orig) in existing {
                if other_label != label && *other_orig != orig {
                    return Err(OpError::DuplicateEdgeCollision {
                        from,
                        to,
                        a: other_label.clone(),
                        b: label.to_string(),
                    });
                }
            }
        }
        pair_labels
            .entry((from, to))
            .or_default()
            .push((label.to_string(), orig));
        edge_origin.insert(key, orig);
        edges.push(Edge {
            from,
            to,
            label: label.to_string(),
        });
        Ok(())
    };
    for e in &head.edges {
        push_edge(
            &mut edges,
            node_map[e.from],
            node_map[e.to],
            &e.label,
            (e.from, e.to),
        )?;
    }
    for e in &other.edges {
        push_edge(
            &mut edges,
            node_map[nh + e.from],
            node_map[nh + e.to],
            &e.label,
            (nh + e.from, nh + e.to),
        )?;
    }

    let sources: BTreeMap<SourceName, NodeId> = result_sources
        .into_iter()
        .map(|(name, side)| {
            let id = match side {
                Side::Head(u) => node_map[u],
                Side::Arg(u) => node_map[nh + u],
            };
            (name, id)
        })
        .collect();
    let annotations: BTreeMap<SourceName, AmType> = result_type
        .entries()
        .map(|(name, t)| (name.clone(), t.clone()))
        .collect();

    AsGraph::new(labels, edges, node_map[result_root], sources, annotations).map_err(OpError::from)
}

#[cfg(test)]
pub(crate) mod tests;
