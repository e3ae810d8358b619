//! Random instance generators for property tests, the acceptance suite
//! and benchmarks. Scores are integer-valued floats throughout so sums
//! compare exactly regardless of association order.

use rand::prelude::*;

use crate::amdep::{AmDepTree, DepEdge, Supertag, Token};
use crate::amtypes::{AmType, EdgeOp, SourceName};
use crate::asgraph::{AsGraph, Edge};
use crate::decode::{Candidate, ScoreTable, FORBIDDEN_SCORE};
use std::collections::{BTreeMap, HashMap};

pub fn src(name: &str) -> SourceName {
    SourceName::new(name).unwrap()
}

pub fn ty(text: &str) -> AmType {
    AmType::parse(text).unwrap()
}

const NODE_LABELS: [&str; 6] = ["alpha", "beta", "gamma", "delta", "kappa", "sigma"];
const EDGE_LABELS: [&str; 4] = ["ARG0", "ARG1", "mod", "op1"];
const SOURCE_POOL: [&str; 4] = ["s", "o", "o2", "m"];

fn annotation_pool() -> Vec<AmType> {
    ["()", "(s)", "(o)", "(s, o)", "(o(s))"]
        .iter()
        .map(|t| ty(t))
        .collect()
}

/// A small random graph honoring all structural invariants: a spanning
/// tree with occasional extra edges, unlabeled nodes carrying source
/// names, and random annotations.
pub fn random_asgraph(rng: &mut impl Rng) -> AsGraph {
    loop {
        let n = rng.gen_range(1..=4);
        let mut labels: Vec<Option<String>> = Vec::new();
        let mut edges: Vec<Edge> = Vec::new();
        for v in 0..n {
            labels.push(Some(NODE_LABELS[rng.gen_range(0..NODE_LABELS.len())].to_string()));
            if v > 0 {
                let parent = rng.gen_range(0..v);
                let label = EDGE_LABELS[rng.gen_range(0..EDGE_LABELS.len())].to_string();
                if rng.gen_bool(0.8) {
                    edges.push(Edge { from: parent, to: v, label });
                } else {
                    edges.push(Edge { from: v, to: parent, label });
                }
            }
        }
        // Occasional reentrant extra edge.
        if n >= 3 && rng.gen_bool(0.3) {
            let from = rng.gen_range(0..n);
            let to = rng.gen_range(0..n);
            let label = EDGE_LABELS[rng.gen_range(0..EDGE_LABELS.len())].to_string();
            if from != to && !edges.iter().any(|e| e.from == from && e.to == to && e.label == label)
            {
                edges.push(Edge {
                    from,
                    to,
                    label,
                });
            }
        }
        let mut names: Vec<&str> = SOURCE_POOL.to_vec();
        names.shuffle(rng);
        let source_count = rng.gen_range(0..=n.min(3));
        let mut sources = BTreeMap::new();
        let mut annotations = BTreeMap::new();
        let pool = annotation_pool();
        let mut nodes: Vec<usize> = (0..n).collect();
        nodes.shuffle(rng);
        for (&node, name) in nodes.iter().zip(names).take(source_count) {
            let name = src(name);
            if rng.gen_bool(0.7) {
                labels[node] = None;
            }
            sources.insert(name.clone(), node);
            if rng.gen_bool(0.5) {
                annotations.insert(name, pool[rng.gen_range(0..pool.len())].clone());
            }
        }
        if let Ok(g) = AsGraph::new(labels, edges, 0, sources, annotations) {
            return g;
        }
    }
}

/// A graph whose type is exactly `target`, for exercising defined applies.
pub fn graph_with_type(rng: &mut impl Rng, target: &AmType) -> AsGraph {
    let mut labels = vec![Some(
        NODE_LABELS[rng.gen_range(0..NODE_LABELS.len())].to_string(),
    )];
    let mut edges = Vec::new();
    let mut sources = BTreeMap::new();
    let mut annotations = BTreeMap::new();
    for (i, (name, ann)) in target.entries().enumerate() {
        labels.push(None);
        edges.push(Edge {
            from: 0,
            to: i + 1,
            label: EDGE_LABELS[i % EDGE_LABELS.len()].to_string(),
        });
        sources.insert(name.clone(), i + 1);
        if !ann.is_empty() {
            annotations.insert(name.clone(), ann.clone());
        }
    }
    AsGraph::new(labels, edges, 0, sources, annotations).unwrap()
}

/// A modifier attachable to `head` at a fresh `m` source: its other
/// sources are a random subset of the head's, annotations matching.
pub fn modifier_for(rng: &mut impl Rng, head: &AsGraph) -> AsGraph {
    let mut labels = vec![Some("modlabel".to_string()), None];
    let mut edges = vec![Edge {
        from: 1,
        to: 0,
        label: "mod".to_string(),
    }];
    let mut sources = BTreeMap::new();
    let annotations: BTreeMap<SourceName, AmType> = BTreeMap::new();
    sources.insert(src("m"), 1usize);
    let mut annotations = annotations;
    let head_type = head.type_of();
    for (name, ann) in head_type.entries() {
        if name.as_str() != "m" && rng.gen_bool(0.4) {
            let id = labels.len();
            labels.push(None);
            edges.push(Edge {
                from: 0,
                to: id,
                label: EDGE_LABELS[id % EDGE_LABELS.len()].to_string(),
            });
            sources.insert(name.clone(), id);
            if !ann.is_empty() {
                annotations.insert(name.clone(), ann.clone());
            }
        }
    }
    AsGraph::new(labels, edges, 0, sources, annotations).unwrap()
}

/// The standard composition-friendly supertag inventory: nominals,
/// intransitives, transitives, a control verb and a modifier, with the
/// lexical label slot filled by `label`.
pub fn inventory_graph(kind: usize, label: &str) -> AsGraph {
    let text = match kind % 5 {
        0 => format!("(x<root> / {label})"),
        1 => format!("(x<root> / {label} :ARG0 (y<s>))"),
        2 => format!("(x<root> / {label} :ARG0 (y<s>) :ARG1 (z<o>))"),
        3 => format!("(x<root> / {label} :ARG0 (y<s>) :ARG1 (z<o(s)>))"),
        _ => format!("(x<root> / {label} :mod-of (y<m>))"),
    };
    crate::asgraph::parse_asgraph(&text).unwrap()
}

/// A random well-typed dependency tree over `n` tokens, built by
/// repeatedly combining subtree roots with operations their types admit.
/// Some tokens are bottom and attach with IGNORE.
pub fn random_well_typed_tree(rng: &mut impl Rng, n: usize) -> AmDepTree {
    'outer: loop {
        let tokens: Vec<Token> = (1..=n)
            .map(|i| Token {
                form: format!("w{i}"),
                pos: "X".to_string(),
            })
            .collect();
        let mut supertags: Vec<Supertag> = Vec::new();
        for i in 0..n {
            if i > 0 && rng.gen_bool(0.2) {
                supertags.push(Supertag::Bottom);
            } else {
                let kind = rng.gen_range(0..5);
                supertags.push(Supertag::Graph(inventory_graph(kind, &format!("lex{i}"))));
            }
        }
        if supertags.iter().all(|s| s.is_bottom()) {
            continue;
        }
        // Live roots with their current subtree types.
        let mut live: Vec<(usize, AmType)> = (1..=n)
            .map(|i| (i, supertags[i - 1].type_of()))
            .collect();
        let mut edges: Vec<DepEdge> = Vec::new();
        let mut guard = 0;
        while live.len() > 1 {
            guard += 1;
            if guard > 200 {
                continue 'outer;
            }
            let hi = rng.gen_range(0..live.len());
            let mut di = rng.gen_range(0..live.len());
            if hi == di {
                di = (di + 1) % live.len();
            }
            let (h, ht) = live[hi].clone();
            let (d, dt) = live[di].clone();
            let mut ops: Vec<(EdgeOp, AmType)> = Vec::new();
            if dt.is_bottom() {
                if !ht.is_bottom() {
                    ops.push((EdgeOp::Ignore, ht.clone()));
                }
            } else if !ht.is_bottom() {
                for (a, ann) in ht.entries() {
                    if ann == &dt {
                        if let Some(res) = crate::amtypes::apply_type(&ht, a, &dt) {
                            ops.push((EdgeOp::Apply(a.clone()), res));
                        }
                    }
                }
                for (a, ann) in dt.entries() {
                    if ann.is_empty() && crate::amtypes::modify_type(&ht, a, &dt).is_some() {
                        ops.push((EdgeOp::Modify(a.clone()), ht.clone()));
                    }
                }
            }
            if ops.is_empty() {
                continue;
            }
            let (op, res) = ops[rng.gen_range(0..ops.len())].clone();
            edges.push(DepEdge { head: h, dep: d, op });
            live.remove(hi.max(di));
            live.remove(hi.min(di));
            live.push((h, res));
        }
        let root = live[0].0;
        if supertags[root - 1].is_bottom() {
            continue;
        }
        match AmDepTree::new(tokens, supertags, edges, root) {
            Ok(tree) if tree.check_well_typed().is_some() => return tree,
            _ => continue,
        }
    }
}

/// Evaluates `tree` under a random per-head child order among those whose
/// every step is defined and whose final type matches the canonical
/// decoration. Returns the evaluated graph.
pub fn eval_with_random_valid_order(tree: &AmDepTree, rng: &mut impl Rng) -> Option<AsGraph> {
    let deco = tree.check_well_typed()?;
    eval_node(tree, tree.root(), &deco, rng)
}

fn eval_node(
    tree: &AmDepTree,
    head: usize,
    deco: &crate::amdep::TypedDecoration,
    rng: &mut impl Rng,
) -> Option<AsGraph> {
    let kids: Vec<&DepEdge> = tree.children(head).collect();
    let mut child_graphs: HashMap<usize, AsGraph> = HashMap::new();
    for e in &kids {
        if e.op != EdgeOp::Ignore {
            child_graphs.insert(e.dep, eval_node(tree, e.dep, deco, rng)?);
        }
    }
    let target = deco.type_at(head);
    // All child orders that stay defined and land on the decoration type.
    let mut perm: Vec<usize> = (0..kids.len()).collect();
    let mut valid: Vec<Vec<usize>> = Vec::new();
    collect_orders(tree, &kids, head, target, deco, &mut perm, 0, &mut valid);
    if valid.is_empty() {
        return None;
    }
    let order = &valid[rng.gen_range(0..valid.len())];
    let mut g = tree.supertag(head).graph()?.clone();
    for &i in order {
        let e = kids[i];
        match &e.op {
            EdgeOp::Apply(a) => g = g.apply(a, &child_graphs[&e.dep]).ok()?,
            EdgeOp::Modify(a) => g = g.modify(a, &child_graphs[&e.dep]).ok()?,
            EdgeOp::Ignore => {}
        }
    }
    Some(g)
}

#[allow(clippy::too_many_arguments)]
fn collect_orders(
    tree: &AmDepTree,
    kids: &[&DepEdge],
    head: usize,
    target: &AmType,
    deco: &crate::amdep::TypedDecoration,
    perm: &mut Vec<usize>,
    at: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if at == perm.len() {
        let mut t = tree.supertag(head).type_of();
        for &i in perm.iter() {
            let e = kids[i];
            match crate::amtypes::op_result(&e.op, &t, deco.type_at(e.dep)) {
                Some(next) => t = next,
                None => return,
            }
        }
        if &t == target {
            out.push(perm.clone());
        }
        return;
    }
    for i in at..perm.len() {
        perm.swap(at, i);
        collect_orders(tree, kids, head, target, deco, perm, at + 1, out);
        perm.swap(at, i);
    }
}

/// A random decoding instance: every token gets up to `max_cands` content
/// candidates from the inventory plus bottom, complete integer edge
/// scores, and sparse integer label scores.
pub fn random_table(rng: &mut impl Rng, n: usize, max_cands: usize) -> ScoreTable {
    let tokens: Vec<Token> = (1..=n)
        .map(|i| Token {
            form: format!("w{i}"),
            pos: ["N", "V", "J"][rng.gen_range(0..3)].to_string(),
        })
        .collect();
    let candidates: Vec<Vec<Candidate>> = (1..=n)
        .map(|i| {
            let count = rng.gen_range(1..=max_cands);
            let mut kinds: Vec<usize> = (0..5).collect();
            kinds.shuffle(rng);
            let mut list: Vec<Candidate> = kinds
                .into_iter()
                .take(count)
                .enumerate()
                .map(|(j, kind)| Candidate {
                    tag: Supertag::Graph(inventory_graph(kind, &format!("lex{i}x{j}"))),
                    score: rng.gen_range(-8i32..=8) as f64,
                })
                .collect();
            list.push(Candidate {
                tag: Supertag::Bottom,
                score: if rng.gen_bool(0.7) {
                    rng.gen_range(-8i32..=0) as f64
                } else {
                    FORBIDDEN_SCORE
                },
            });
            list
        })
        .collect();
    let mut edge_scores = HashMap::new();
    for k in 1..=n {
        edge_scores.insert((0, k), rng.gen_range(-4i32..=8) as f64);
        for i in 1..=n {
            if i != k {
                edge_scores.insert((i, k), rng.gen_range(-4i32..=8) as f64);
            }
        }
    }
    let ops = [
        EdgeOp::Apply(src("s")),
        EdgeOp::Apply(src("o")),
        EdgeOp::Modify(src("m")),
        EdgeOp::Ignore,
    ];
    let mut label_scores = HashMap::new();
    for i in 1..=n {
        for k in 1..=n {
            if i != k && rng.gen_bool(0.5) {
                let op = ops[rng.gen_range(0..ops.len())].clone();
                label_scores.insert((i, k, op), rng.gen_range(-4i32..=6) as f64);
            }
        }
    }
    ScoreTable {
        tokens,
        candidates,
        edge_scores,
        label_scores,
        label_default: -1.0,
    }
}

pub use crate::amdep::is_projective;
