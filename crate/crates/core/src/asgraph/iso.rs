//! Graph isomorphism and canonical node ordering.
//!
//! Both are exact. Sizes here are sentence-scale (rarely above 50 nodes),
//! so a color-refinement pass followed by backtracking over the remaining
//! ambiguous nodes is plenty.

use std::collections::{BTreeMap, HashMap};

use super::{AsGraph, NodeId};

/// Per-node invariant used to seed refinement: everything that must be
/// preserved pointwise by an isomorphism.
fn seed_key(g: &AsGraph, node: NodeId) -> String {
    let source = g
        .source_of_node(node)
        .map(|name| format!("{}#{}", name, g.annotation(name)))
        .unwrap_or_default();
    format!(
        "{}|{}|{}",
        g.label(node).unwrap_or(""),
        (node == g.root()) as u8,
        source
    )
}

fn initial_colors(g: &AsGraph) -> Vec<usize> {
    let keys: Vec<String> = (0..g.node_count()).map(|u| seed_key(g, u)).collect();
    rank(keys)
}

fn rank<K: Ord + Clone>(keys: Vec<K>) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.clone();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).unwrap())
        .collect()
}

/// One refinement round: a node's new color is its old color plus the
/// multiset of (edge label, direction, neighbor color).
fn refine_step(g: &AsGraph, colors: &[usize]) -> Vec<usize> {
    let mut keys: Vec<(usize, Vec<(String, u8, usize)>)> = colors
        .iter()
        .map(|&c| (c, Vec::new()))
        .collect();
    for e in g.edges() {
        keys[e.from].1.push((e.label.clone(), 0, colors[e.to]));
        keys[e.to].1.push((e.label.clone(), 1, colors[e.from]));
    }
    for k in keys.iter_mut() {
        k.1.sort();
    }
    rank(keys)
}

fn refine(g: &AsGraph, mut colors: Vec<usize>) -> Vec<usize> {
    loop {
        let next = refine_step(g, &colors);
        let old_count = colors.iter().max().map_or(0, |m| m + 1);
        let new_count = next.iter().max().map_or(0, |m| m + 1);
        colors = next;
        if new_count == old_count {
            return colors;
        }
    }
}

/// A complete order certificate: the relabeled node row and edge set.
/// Comparing certificates compares isomorphism-class representatives.
type Certificate = (Vec<(usize, String)>, Vec<(usize, String, usize)>);

fn certificate(g: &AsGraph, order: &[usize]) -> Certificate {
    let mut nodes: Vec<(usize, String)> = (0..g.node_count())
        .map(|u| (order[u], seed_key(g, u)))
        .collect();
    nodes.sort();
    let mut edges: Vec<(usize, String, usize)> = g
        .edges()
        .iter()
        .map(|e| (order[e.from], e.label.clone(), order[e.to]))
        .collect();
    edges.sort();
    (nodes, edges)
}

fn is_discrete(colors: &[usize]) -> bool {
    let max = colors.iter().max().map_or(0, |m| m + 1);
    max == colors.len()
}

fn search_order(g: &AsGraph, colors: Vec<usize>) -> (Vec<usize>, Certificate) {
    if is_discrete(&colors) {
        let cert = certificate(g, &colors);
        return (colors, cert);
    }
    // Individualize each member of the first non-singleton color class and
    // keep the branch with the smallest certificate. Members of one class
    // are interchangeable under refinement, so this choice is
    // id-independent.
    let mut class_count: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &colors {
        *class_count.entry(c).or_default() += 1;
    }
    let target = *class_count
        .iter()
        .find(|(_, &count)| count > 1)
        .expect("non-discrete coloring has a class with two members")
        .0;
    let mut best: Option<(Vec<usize>, Certificate)> = None;
    for u in 0..g.node_count() {
        if colors[u] != target {
            continue;
        }
        // Split u out of its class by doubling the color space.
        let mut c2: Vec<usize> = colors.iter().map(|&c| c * 2 + 1).collect();
        c2[u] = colors[u] * 2;
        let refined = refine(g, rank(c2));
        let candidate = search_order(g, refined);
        match &best {
            Some((_, cert)) if *cert <= candidate.1 => {}
            _ => best = Some(candidate),
        }
    }
    best.unwrap()
}

/// A total node order (node id -> rank) depending only on the isomorphism
/// class of the graph.
pub(super) fn canonical_order(g: &AsGraph) -> Vec<usize> {
    let colors = refine(g, initial_colors(g));
    search_order(g, colors).0
}

pub(super) fn is_isomorphic(a: &AsGraph, b: &AsGraph) -> bool {
    if a.node_count() != b.node_count()
        || a.edges().len() != b.edges().len()
        || a.type_of() != b.type_of()
    {
        return false;
    }
    // Refine both graphs in one shared color space; the histograms must
    // agree for an isomorphism to exist.
    let na = a.node_count();
    let joint = joint_colors(a, b);
    let (ja, jb) = joint.split_at(na);
    let mut ha: Vec<usize> = ja.to_vec();
    let mut hb: Vec<usize> = jb.to_vec();
    ha.sort_unstable();
    hb.sort_unstable();
    if ha != hb {
        return false;
    }

    // Backtracking on the joint coloring with adjacency consistency.
    let mut adj_a: HashMap<(NodeId, NodeId), Vec<&str>> = HashMap::new();
    for e in a.edges() {
        adj_a.entry((e.from, e.to)).or_default().push(&e.label);
    }
    let mut adj_b: HashMap<(NodeId, NodeId), Vec<&str>> = HashMap::new();
    for e in b.edges() {
        adj_b.entry((e.from, e.to)).or_default().push(&e.label);
    }
    for v in adj_a.values_mut() {
        v.sort_unstable();
    }
    for v in adj_b.values_mut() {
        v.sort_unstable();
    }

    // Pin root and sources up front.
    let mut map: Vec<Option<NodeId>> = vec![None; na];
    let mut used = vec![false; b.node_count()];
    let pin = |map: &mut Vec<Option<NodeId>>, used: &mut Vec<bool>, x: NodeId, y: NodeId| {
        match map[x] {
            Some(existing) => existing == y,
            None => {
                if used[y] {
                    return false;
                }
                map[x] = Some(y);
                used[y] = true;
                true
            }
        }
    };
    if !pin(&mut map, &mut used, a.root(), b.root()) {
        return false;
    }
    for (name, &x) in a.sources() {
        let Some(&y) = b.sources().get(name) else {
            return false;
        };
        if !pin(&mut map, &mut used, x, y) {
            return false;
        }
    }

    // Order unmapped a-nodes by color class size for cheaper backtracking.
    let mut todo: Vec<NodeId> = (0..na).filter(|&u| map[u].is_none()).collect();
    todo.sort_by_key(|&u| ja[u]);

    fn consistent(
        x: NodeId,
        y: NodeId,
        map: &[Option<NodeId>],
        adj_a: &HashMap<(NodeId, NodeId), Vec<&str>>,
        adj_b: &HashMap<(NodeId, NodeId), Vec<&str>>,
        na: usize,
    ) -> bool {
        for z in 0..na {
            let Some(w) = map[z] else { continue };
            if adj_a.get(&(x, z)) != adj_b.get(&(y, w)) {
                return false;
            }
            if adj_a.get(&(z, x)) != adj_b.get(&(w, y)) {
                return false;
            }
        }
        true
    }

    fn extend(
        idx: usize,
        todo: &[NodeId],
        ja: &[usize],
        jb: &[usize],
        map: &mut Vec<Option<NodeId>>,
        used: &mut Vec<bool>,
        adj_a: &HashMap<(NodeId, NodeId), Vec<&str>>,
        adj_b: &HashMap<(NodeId, NodeId), Vec<&str>>,
    ) -> bool {
        if idx == todo.len() {
            return true;
        }
        let x = todo[idx];
        let na = map.len();
        for y in 0..used.len() {
            if used[y] || jb[y] != ja[x] {
                continue;
            }
            if !consistent(x, y, map, adj_a, adj_b, na) {
                continue;
            }
            map[x] = Some(y);
            used[y] = true;
            if extend(idx + 1, todo, ja, jb, map, used, adj_a, adj_b) {
                return true;
            }
            map[x] = None;
            used[y] = false;
        }
        false
    }

    // Pinned pairs must themselves be adjacency-consistent.
    let pinned: Vec<(NodeId, NodeId)> = map
        .iter()
        .enumerate()
        .filter_map(|(x, y)| y.map(|y| (x, y)))
        .collect();
    for &(x, y) in &pinned {
        if ja[x] != jb[y] || !consistent(x, y, &map, &adj_a, &adj_b, na) {
            return false;
        }
    }

    extend(0, &todo, ja, jb, &mut map, &mut used, &adj_a, &adj_b)
}

/// Refines both graphs in one shared color space so class ids line up.
fn joint_colors(a: &AsGraph, b: &AsGraph) -> Vec<usize> {
    let na = a.node_count();
    let keys: Vec<String> = (0..na)
        .map(|u| seed_key(a, u))
        .chain((0..b.node_count()).map(|u| seed_key(b, u)))
        .collect();
    let mut colors = rank(keys);
    loop {
        let mut keys: Vec<(usize, Vec<(String, u8, usize)>)> =
            colors.iter().map(|&c| (c, Vec::new())).collect();
        for e in a.edges() {
            keys[e.from].1.push((e.label.clone(), 0, colors[e.to]));
            keys[e.to].1.push((e.label.clone(), 1, colors[e.from]));
        }
        for e in b.edges() {
            keys[na + e.from]
                .1
                .push((e.label.clone(), 0, colors[na + e.to]));
            keys[na + e.to]
                .1
                .push((e.label.clone(), 1, colors[na + e.from]));
        }
        for k in keys.iter_mut() {
            k.1.sort();
        }
        let next = rank(keys);
        let old_count = colors.iter().max().map_or(0, |m| m + 1);
        let new_count = next.iter().max().map_or(0, |m| m + 1);
        colors = next;
        if new_count == old_count {
            return colors;
        }
    }
}
