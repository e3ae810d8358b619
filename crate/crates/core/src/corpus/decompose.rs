//! Decomposition of an aligned AMR into elementary graphs and a
//! dependency tree that evaluates back to it.
//!
//! Every AMR edge is owned by the fragment of one endpoint (the blob
//! policy decides which); cross-fragment edges become placeholder sources
//! in the owner, named from the incoming edge label with object promotion
//! and unaccusative subjects. Source-owned cross edges induce apply
//! edges, target-owned ones modify edges. A node with several incoming
//! candidates is re-entrant: it attaches under the lowest common ancestor
//! of its candidate heads and every surviving placeholder keeps its shared
//! source name, which is what reconstructs the reentrancy at evaluation
//! time; candidates whose names disagree are deleted with a counter.
//! Annotations are inferred bottom-up from the finished tree and the whole
//! decomposition is validated by evaluating back to the input graph.

use std::collections::BTreeMap;

use crate::amdep::{AmDepTree, DepEdge, Supertag, Token, TreeError};
use crate::amtypes::{AmType, EdgeOp, SourceName};
use crate::asgraph::{AsGraph, Edge, NodeId};
use crate::util::DetMap;

use super::align::{skeleton_parents, Alignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ownership {
    Source,
    Target,
}

/// Which fragment owns each edge label, and how placeholder sources are
/// named. Label patterns `ARG*`, `op*`, `snt*` match with their index.
#[derive(Clone, Debug)]
pub struct BlobPolicy {
    pub target_owned: Vec<String>,
    pub default_ownership: Ownership,
    /// Explicit name overrides for source-owned labels.
    pub source_names: Vec<(String, String)>,
    /// Placeholder name for target-owned (modifier) fragments.
    pub modifier_name: String,
}

impl Default for BlobPolicy {
    fn default() -> Self {
        BlobPolicy {
            target_owned: [
                "manner", "mod", "time", "location", "poss", "degree", "polarity",
                "duration", "frequency",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            default_ownership: Ownership::Source,
            source_names: vec![("quant".to_string(), "q".to_string())],
            modifier_name: "m".to_string(),
        }
    }
}

impl BlobPolicy {
    pub fn ownership(&self, label: &str) -> Ownership {
        if label.starts_with("ARG") || label.starts_with("op") || label.starts_with("snt")
            || label == "domain"
        {
            return Ownership::Source;
        }
        if self.target_owned.iter().any(|l| l == label) {
            return Ownership::Target;
        }
        self.default_ownership
    }
}

/// Why a sentence cannot be decomposed. These become reason codes in the
/// conversion statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reject {
    UnalignedNodes(usize),
    MultiRootFragment(usize),
    EdgeIntoNonRoot(String),
    NameConflict(usize, String),
    NoParent(usize),
    Unresolvable(usize),
    NotATree(String),
    NotWellTyped,
    RoundTripMismatch,
}

impl std::fmt::Display for Reject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reject::UnalignedNodes(n) => write!(f, "unaligned-nodes({n})"),
            Reject::MultiRootFragment(t) => write!(f, "multi-root-fragment({t})"),
            Reject::EdgeIntoNonRoot(l) => write!(f, "edge-into-non-root({l})"),
            Reject::NameConflict(t, n) => write!(f, "name-conflict({t},{n})"),
            Reject::NoParent(t) => write!(f, "no-parent({t})"),
            Reject::Unresolvable(t) => write!(f, "unresolvable-reentrancy({t})"),
            Reject::NotATree(e) => write!(f, "not-a-tree({e})"),
            Reject::NotWellTyped => write!(f, "not-well-typed"),
            Reject::RoundTripMismatch => write!(f, "round-trip-mismatch"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Decomposed {
    pub tree: AmDepTree,
    /// Per token, the lexical node's id inside its supertag graph.
    pub lex_nodes: Vec<Option<NodeId>>,
    pub removed_reentrancies: usize,
}

#[derive(Clone, Debug)]
struct Placeholder {
    owner: usize,
    name: SourceName,
    target: NodeId,
    via: Edge,
    kind: Ownership,
}

#[derive(Clone, Debug)]
struct Candidate {
    head: usize,
    dep: usize,
    op_name: SourceName,
    is_modify: bool,
    via: Edge,
}

pub fn decompose(
    amr: &AsGraph,
    alignment: &Alignment,
    tokens: &[Token],
    policy: &BlobPolicy,
) -> Result<Decomposed, Reject> {
    if !alignment.unaligned.is_empty() {
        return Err(Reject::UnalignedNodes(alignment.unaligned.len()));
    }
    let n_tokens = tokens.len();
    let parents = skeleton_parents(amr);
    let token_of = |node: NodeId| alignment.node_to_token[node].expect("all nodes aligned");

    // Fragment roots, with the single-root check.
    let mut frag_root: DetMap<usize, NodeId> = DetMap::default();
    for token in 1..=n_tokens {
        let frag = alignment.fragment(token);
        if frag.is_empty() {
            continue;
        }
        let tops: Vec<NodeId> = frag
            .iter()
            .copied()
            .filter(|&n| match parents[n] {
                Some(p) => !frag.contains(&p),
                None => true,
            })
            .collect();
        if tops.len() != 1 {
            return Err(Reject::MultiRootFragment(token));
        }
        frag_root.insert(token, tops[0]);
    }
    let root_token = token_of(amr.root());

    // Classify cross edges, build placeholders and dependency candidates.
    let mut working_edges: Vec<Edge> = amr.edges().to_vec();
    let mut placeholders: Vec<Placeholder> = Vec::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut source_owned_by_frag: DetMap<usize, Vec<Edge>> = DetMap::default();
    for e in amr.edges() {
        let (tu, tv) = (token_of(e.from), token_of(e.to));
        if tu == tv {
            continue;
        }
        match policy.ownership(&e.label) {
            Ownership::Source => {
                if frag_root[&tv] != e.to {
                    return Err(Reject::EdgeIntoNonRoot(e.label.clone()));
                }
                source_owned_by_frag.entry(tu).or_default().push(e.clone());
            }
            Ownership::Target => {
                if frag_root[&tu] != e.from {
                    return Err(Reject::EdgeIntoNonRoot(e.label.clone()));
                }
                let name = SourceName::new(&policy.modifier_name)
                    .expect("modifier name is validated by config loading");
                placeholders.push(Placeholder {
                    owner: tv,
                    name: name.clone(),
                    target: e.from,
                    via: e.clone(),
                    kind: Ownership::Target,
                });
                candidates.push(Candidate {
                    head: tu,
                    dep: tv,
                    op_name: name,
                    is_modify: true,
                    via: e.clone(),
                });
            }
        }
    }

    // Placeholder naming for source-owned edges: object promotion and
    // unaccusative subjects.
    for (&owner, edges) in source_owned_by_frag.iter() {
        let mut args: Vec<(usize, &Edge)> = Vec::new();
        let mut others: Vec<&Edge> = Vec::new();
        for e in edges {
            if let Some(idx) = e.label.strip_prefix("ARG").and_then(|s| s.parse().ok()) {
                args.push((idx, e));
            } else {
                others.push(e);
            }
        }
        args.sort_by_key(|(idx, e)| (*idx, e.from, e.to));
        let mut names: Vec<(SourceName, &Edge)> = Vec::new();
        let mut queue = args.iter().peekable();
        if let Some((0, e)) = queue.peek() {
            names.push((SourceName::new("s").unwrap(), e));
            queue.next();
        } else if queue.peek().is_some() {
            // No ARG0 but some ARGi: the minimal object becomes the
            // subject slot.
            let (_, e) = queue.next().unwrap();
            names.push((SourceName::new("s").unwrap(), e));
        }
        for (k, (_, e)) in queue.enumerate() {
            let name = if k == 0 {
                "o".to_string()
            } else {
                format!("o{}", k + 1)
            };
            names.push((SourceName::new(&name).unwrap(), e));
        }
        for e in others {
            let name = policy
                .source_names
                .iter()
                .find(|(l, _)| l == &e.label)
                .map(|(_, n)| n.clone())
                .unwrap_or_else(|| {
                    e.label
                        .chars()
                        .filter(|c| c.is_ascii_alphanumeric())
                        .collect::<String>()
                        .to_lowercase()
                });
            let name =
                SourceName::new(&name).map_err(|_| Reject::EdgeIntoNonRoot(e.label.clone()))?;
            names.push((name, e));
        }
        let mut seen: Vec<SourceName> = Vec::new();
        for (name, e) in names {
            if seen.contains(&name) {
                return Err(Reject::NameConflict(owner, name.as_str().to_string()));
            }
            placeholders.push(Placeholder {
                owner,
                name: name.clone(),
                target: e.to,
                via: e.clone(),
                kind: Ownership::Source,
            });
            candidates.push(Candidate {
                head: owner,
                dep: token_of(e.to),
                op_name: name.clone(),
                is_modify: false,
                via: e.clone(),
            });
            seen.push(name);
        }
    }
    // One placeholder name per fragment.
    for token in 1..=n_tokens {
        let mut names: Vec<&SourceName> = placeholders
            .iter()
            .filter(|p| p.owner == token)
            .map(|p| &p.name)
            .collect();
        names.sort();
        for w in names.windows(2) {
            if w[0] == w[1] {
                return Err(Reject::NameConflict(token, w[0].as_str().to_string()));
            }
        }
    }

    // Resolve the dependency structure. Tokens with one candidate are
    // forced; re-entrant targets attach under the LCA of their heads.
    let mut removed = 0usize;
    let mut by_dep: BTreeMap<usize, Vec<Candidate>> = BTreeMap::new();
    for c in &candidates {
        by_dep.entry(c.dep).or_default().push(c.clone());
    }
    let mut parent: Vec<Option<(usize, EdgeOp)>> = vec![None; n_tokens + 1];
    let mut pending: Vec<usize> = Vec::new();
    for (&dep, cands) in &by_dep {
        if dep == root_token {
            // The root can only collect re-entrant references; those
            // edges stay as plain placeholders or get deleted below.
            continue;
        }
        if cands.len() == 1 {
            let c = &cands[0];
            let op = if c.is_modify {
                EdgeOp::Modify(c.op_name.clone())
            } else {
                EdgeOp::Apply(c.op_name.clone())
            };
            parent[dep] = Some((c.head, op));
        } else {
            pending.push(dep);
        }
    }
    for token in 1..=n_tokens {
        if frag_root.contains_key(&token)
            && token != root_token
            && parent[token].is_none()
            && !pending.contains(&token)
        {
            return Err(Reject::NoParent(token));
        }
    }

    let mut guard = 0;
    while !pending.is_empty() {
        guard += 1;
        if guard > n_tokens + 2 {
            return Err(Reject::Unresolvable(pending[0]));
        }
        let mut progressed = false;
        pending.retain(|&dep| {
            let cands = &by_dep[&dep];
            // Majority name group wins; the rest are deleted reentrancies.
            let mut groups: BTreeMap<&SourceName, Vec<&Candidate>> = BTreeMap::new();
            for c in cands {
                if !c.is_modify {
                    groups.entry(&c.op_name).or_default().push(c);
                }
            }
            let Some((name, group)) = groups
                .iter()
                .max_by_key(|(name, g)| (g.len(), std::cmp::Reverse(*name)))
                .map(|(n, g)| ((*n).clone(), g.clone()))
            else {
                return true;
            };
            let heads: Vec<usize> = group.iter().map(|c| c.head).collect();
            let Some(lca) = forest_lca(&heads, &parent) else {
                return true; // try again next round
            };
            parent[dep] = Some((lca, EdgeOp::Apply(name.clone())));
            progressed = true;
            false
        });
        if !progressed && !pending.is_empty() {
            return Err(Reject::Unresolvable(pending[0]));
        }
    }

    // Reentrant references that never became tree edges survive as shared
    // placeholder sources when their name matches the one the target was
    // attached under; mismatching ones are deleted with the counter.
    let attached_name = |dep: usize| -> Option<&SourceName> {
        parent[dep].as_ref().and_then(|(_, op)| match op {
            EdgeOp::Apply(a) => Some(a),
            EdgeOp::Modify(a) => Some(a),
            EdgeOp::Ignore => None,
        })
    };
    let mut deleted: Vec<Edge> = Vec::new();
    for c in &candidates {
        let is_tree_edge = parent[c.dep]
            .as_ref()
            .map_or(false, |(h, op)| *h == c.head && op_matches(op, c));
        if is_tree_edge || c.is_modify {
            continue;
        }
        let keeps = match attached_name(c.dep) {
            Some(name) => name == &c.op_name,
            None => false,
        };
        if !keeps {
            deleted.push(c.via.clone());
            removed += 1;
        }
    }
    // A modify candidate that lost can't be reconstructed: delete it too.
    for c in &candidates {
        if c.is_modify {
            let is_tree_edge = parent[c.dep]
                .as_ref()
                .map_or(false, |(h, op)| *h == c.head && op_matches(op, c));
            if !is_tree_edge {
                deleted.push(c.via.clone());
                removed += 1;
            }
        }
    }
    working_edges.retain(|e| !deleted.contains(e));
    let live_placeholders: Vec<&Placeholder> = placeholders
        .iter()
        .filter(|p| !deleted.contains(&p.via))
        .collect();

    // Assemble elementary graphs.
    let mut supertags: Vec<Supertag> = Vec::new();
    let mut lex_nodes: Vec<Option<NodeId>> = Vec::new();
    let mut placeholder_node: DetMap<(usize, NodeId), NodeId> = DetMap::default();
    let mut frag_node_map: DetMap<(usize, NodeId), NodeId> = DetMap::default();
    for token in 1..=n_tokens {
        let frag = alignment.fragment(token);
        if frag.is_empty() {
            supertags.push(Supertag::Bottom);
            lex_nodes.push(None);
            continue;
        }
        let mut labels: Vec<Option<String>> = Vec::new();
        for (local, &node) in frag.iter().enumerate() {
            labels.push(amr.label(node).map(str::to_string));
            frag_node_map.insert((token, node), local);
        }
        let mut sources: BTreeMap<SourceName, NodeId> = BTreeMap::new();
        for p in live_placeholders.iter().filter(|p| p.owner == token) {
            let local = labels.len();
            labels.push(None);
            placeholder_node.insert((token, p.target), local);
            sources.insert(p.name.clone(), local);
        }
        let mut edges: Vec<Edge> = Vec::new();
        for e in &working_edges {
            let (tu, tv) = (token_of(e.from), token_of(e.to));
            if tu == token && tv == token {
                edges.push(Edge {
                    from: frag_node_map[&(token, e.from)],
                    to: frag_node_map[&(token, e.to)],
                    label: e.label.clone(),
                });
            } else if tu == token && placeholder_node.contains_key(&(token, e.to)) {
                edges.push(Edge {
                    from: frag_node_map[&(token, e.from)],
                    to: placeholder_node[&(token, e.to)],
                    label: e.label.clone(),
                });
            } else if tv == token && placeholder_node.contains_key(&(token, e.from)) {
                edges.push(Edge {
                    from: placeholder_node[&(token, e.from)],
                    to: frag_node_map[&(token, e.to)],
                    label: e.label.clone(),
                });
            }
        }
        let root = frag_node_map[&(token, frag_root[&token])];
        let graph = AsGraph::new(labels, edges, root, sources, BTreeMap::new())
            .map_err(|e| Reject::NotATree(e.to_string()))?;
        let lex = alignment
            .lexical_node
            .get(&token)
            .and_then(|n| frag_node_map.get(&(token, *n)))
            .copied();
        supertags.push(Supertag::Graph(graph));
        lex_nodes.push(lex);
    }

    // Dependency edges, with bottom tokens ignored from the root.
    let mut dep_edges: Vec<DepEdge> = Vec::new();
    for token in 1..=n_tokens {
        if let Some((head, op)) = &parent[token] {
            dep_edges.push(DepEdge {
                head: *head,
                dep: token,
                op: op.clone(),
            });
        } else if supertags[token - 1].is_bottom() {
            dep_edges.push(DepEdge {
                head: root_token,
                dep: token,
                op: EdgeOp::Ignore,
            });
        }
    }

    let build = |tags: Vec<Supertag>| -> Result<AmDepTree, TreeError> {
        AmDepTree::new(tokens.to_vec(), tags, dep_edges.clone(), root_token)
    };
    let mut tree = build(supertags.clone()).map_err(|e| Reject::NotATree(e.to_string()))?;

    // Annotation inference to fixpoint: the annotation of source a at a
    // head is the final type of its apply child, installed on every
    // placeholder standing for the same graph node.
    for _ in 0..10 {
        let subtree_types = infer_subtree_types(&tree);
        let mut desired: DetMap<(SourceName, NodeId), AmType> = DetMap::default();
        for e in tree.edges() {
            if let EdgeOp::Apply(a) = &e.op {
                let target = frag_root[&e.dep];
                desired.insert((a.clone(), target), subtree_types[e.dep].clone());
            }
        }
        let mut changed = false;
        let mut new_tags: Vec<Supertag> = Vec::new();
        for token in 1..=n_tokens {
            match &supertags[token - 1] {
                Supertag::Bottom => new_tags.push(Supertag::Bottom),
                Supertag::Graph(g) => {
                    let mut annotations: BTreeMap<SourceName, AmType> = BTreeMap::new();
                    for p in live_placeholders.iter().filter(|p| p.owner == token) {
                        if let Some(t) = desired.get(&(p.name.clone(), p.target)) {
                            if !t.is_empty() {
                                annotations.insert(p.name.clone(), t.clone());
                            }
                        }
                    }
                    if g.type_of()
                        != AmType::Map(
                            g.sources()
                                .keys()
                                .map(|n| {
                                    (
                                        n.clone(),
                                        annotations.get(n).cloned().unwrap_or_else(AmType::empty),
                                    )
                                })
                                .collect(),
                        )
                    {
                        changed = true;
                    }
                    let rebuilt = AsGraph::new(
                        (0..g.node_count()).map(|u| g.label(u).map(str::to_string)).collect(),
                        g.edges().to_vec(),
                        g.root(),
                        g.sources().clone(),
                        annotations,
                    )
                    .map_err(|e| Reject::NotATree(e.to_string()))?;
                    new_tags.push(Supertag::Graph(rebuilt));
                }
            }
        }
        supertags = new_tags;
        tree = build(supertags.clone()).map_err(|e| Reject::NotATree(e.to_string()))?;
        if !changed {
            break;
        }
    }

    let deco = tree.check_well_typed().ok_or(Reject::NotWellTyped)?;
    if !deco.root_type().is_empty() {
        return Err(Reject::NotWellTyped);
    }
    let evaluated = tree.eval().map_err(|_| Reject::NotWellTyped)?;
    let reference = AsGraph::new(
        (0..amr.node_count())
            .map(|u| amr.label(u).map(str::to_string))
            .collect(),
        working_edges,
        amr.root(),
        BTreeMap::new(),
        BTreeMap::new(),
    )
    .map_err(|_| Reject::RoundTripMismatch)?;
    if !evaluated.is_isomorphic(&reference) {
        return Err(Reject::RoundTripMismatch);
    }

    Ok(Decomposed {
        tree,
        lex_nodes,
        removed_reentrancies: removed,
    })
}

fn op_matches(op: &EdgeOp, c: &Candidate) -> bool {
    match op {
        EdgeOp::Apply(a) => !c.is_modify && a == &c.op_name,
        EdgeOp::Modify(a) => c.is_modify && a == &c.op_name,
        EdgeOp::Ignore => false,
    }
}

/// LCA of `heads` in the partial parent forest; `None` when they are not
/// yet connected.
fn forest_lca(heads: &[usize], parent: &[Option<(usize, EdgeOp)>]) -> Option<usize> {
    let path = |mut t: usize| -> Vec<usize> {
        let mut p = vec![t];
        while let Some((h, _)) = &parent[t] {
            t = *h;
            p.push(t);
        }
        p
    };
    let mut common: Vec<usize> = path(heads[0]);
    for &h in &heads[1..] {
        let other = path(h);
        // Keep the suffix shared with `other` (paths end at the root).
        let mut a = common.iter().rev();
        let mut b = other.iter().rev();
        let mut shared = Vec::new();
        loop {
            match (a.next(), b.next()) {
                (Some(x), Some(y)) if x == y => shared.push(*x),
                _ => break,
            }
        }
        if shared.is_empty() {
            return None;
        }
        shared.reverse();
        common = shared;
    }
    common.first().copied()
}

/// Subtree types by the canonical fold, with raw set arithmetic so the
/// fixpoint can pass through momentarily inconsistent annotations.
fn infer_subtree_types(tree: &AmDepTree) -> Vec<AmType> {
    let mut types: Vec<AmType> = vec![AmType::Bottom; tree.n() + 1];
    fn visit(tree: &AmDepTree, head: usize, types: &mut Vec<AmType>) {
        let kids: Vec<DepEdge> = tree.children(head).cloned().collect();
        for e in &kids {
            visit(tree, e.dep, types);
        }
        let mut t = tree.supertag(head).type_of();
        let mut apps: Vec<&DepEdge> = kids
            .iter()
            .filter(|e| matches!(e.op, EdgeOp::Apply(_)))
            .collect();
        apps.sort_by_key(|e| std::cmp::Reverse(e.dep));
        for e in apps {
            let EdgeOp::Apply(a) = &e.op else { unreachable!() };
            if let AmType::Map(mut m) = t {
                m.remove(a);
                let child = types[e.dep].clone();
                for (name, ann) in child.entries() {
                    m.entry(name.clone()).or_insert_with(|| ann.clone());
                }
                t = AmType::Map(m);
            }
        }
        types[head] = t;
    }
    visit(tree, tree.root(), &mut types);
    types
}
