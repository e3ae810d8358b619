//! Greedy word/node alignment.
//!
//! Two action types, executed best-first until exhausted: align a word to
//! a node (lexical similarity plus a rule table; that node becomes the
//! token's lexical node), and extend an existing alignment over an edge
//! to an adjacent node, weighted by the edge label and direction.
//! Extensions that would give a fragment two tops in the graph's spanning
//! skeleton are disallowed, so every fragment keeps a single root node
//! where other graphs can attach. Leftover nodes join adjacent fragments
//! when that stays legal; anything else is reported unaligned.

use crate::amdep::Token;
use crate::asgraph::{AsGraph, NodeId};
use crate::util::DetMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtendDirection {
    /// From an aligned edge source to its target.
    Down,
    /// From an aligned edge target to its source.
    Up,
}

#[derive(Clone, Debug)]
pub struct AlignConfig {
    pub exact_weight: f64,
    pub rule_weight: f64,
    pub prefix_weight: f64,
    /// Minimum shared prefix for the stemming-style match.
    pub min_prefix: usize,
    pub extend_base: f64,
    /// (edge label, direction) -> extension preference. `ARG*` keys match
    /// any argument label.
    pub extend_weights: Vec<((String, ExtendDirection), f64)>,
    pub extend_default: f64,
    pub neighbor_bonus: f64,
    pub conflict_penalty: f64,
    /// node label -> token forms it may align to (handwritten rules).
    pub rules: Vec<(String, Vec<String>)>,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            exact_weight: 10.0,
            rule_weight: 9.0,
            prefix_weight: 8.0,
            min_prefix: 4,
            extend_base: 2.0,
            extend_weights: vec![
                (("name".to_string(), ExtendDirection::Up), 2.0),
                (("ARG*".to_string(), ExtendDirection::Down), 1.0),
                (("ARG*".to_string(), ExtendDirection::Up), 1.0),
            ],
            extend_default: 0.25,
            neighbor_bonus: 1.0,
            conflict_penalty: 0.5,
            rules: vec![("-".to_string(), vec!["not".to_string(), "n't".to_string()])],
        }
    }
}

impl AlignConfig {
    fn extend_weight(&self, label: &str, dir: ExtendDirection) -> f64 {
        for ((l, d), w) in &self.extend_weights {
            let hit = *d == dir
                && (l == label || (l == "ARG*" && label.starts_with("ARG")));
            if hit {
                return *w;
            }
        }
        self.extend_default
    }
}

#[derive(Clone, Debug)]
pub struct Alignment {
    /// node -> 1-based token index.
    pub node_to_token: Vec<Option<usize>>,
    /// token -> the node carrying its lexical label.
    pub lexical_node: DetMap<usize, NodeId>,
    pub unaligned: Vec<NodeId>,
}

impl Alignment {
    pub fn fragment(&self, token: usize) -> Vec<NodeId> {
        self.node_to_token
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == Some(token))
            .map(|(n, _)| n)
            .collect()
    }
}

/// Spanning skeleton parents from a breadth-first walk out of the root,
/// ignoring edge direction. Deterministic for a given graph value.
pub(crate) fn skeleton_parents(g: &AsGraph) -> Vec<Option<NodeId>> {
    let mut parent: Vec<Option<NodeId>> = vec![None; g.node_count()];
    let mut seen = vec![false; g.node_count()];
    seen[g.root()] = true;
    let mut queue = std::collections::VecDeque::from([g.root()]);
    while let Some(u) = queue.pop_front() {
        let mut nbrs: Vec<NodeId> = Vec::new();
        for e in g.edges() {
            if e.from == u && !seen[e.to] {
                nbrs.push(e.to);
            }
            if e.to == u && !seen[e.from] {
                nbrs.push(e.from);
            }
        }
        nbrs.sort_unstable();
        nbrs.dedup();
        for v in nbrs {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    parent
}

fn strip_sense(label: &str) -> &str {
    if let Some(pos) = label.rfind('-') {
        if label[pos + 1..].chars().all(|c| c.is_ascii_digit())
            && !label[pos + 1..].is_empty()
        {
            return &label[..pos];
        }
    }
    label
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).take_while(|(x, y)| x == y).count()
}

fn action1_base(cfg: &AlignConfig, label: &str, form: &str) -> f64 {
    let lemma = strip_sense(label).to_lowercase();
    let form_l = form.to_lowercase();
    if lemma == form_l {
        return cfg.exact_weight;
    }
    if cfg
        .rules
        .iter()
        .any(|(l, forms)| l == label && forms.iter().any(|f| f == &form_l))
    {
        return cfg.rule_weight;
    }
    // Inflected form: the lemma plus a short suffix, or a long shared
    // prefix (suffix alternations like reply/replied).
    let suffixed = lemma.len() >= 3
        && form_l.starts_with(&lemma)
        && form_l.len() - lemma.len() <= 3;
    if suffixed || common_prefix(&lemma, &form_l) >= cfg.min_prefix {
        return cfg.prefix_weight;
    }
    0.0
}

/// True iff the fragment (plus an optional extra node) has exactly one
/// member whose skeleton parent lies outside it.
fn single_root(frag: &[NodeId], extra: Option<NodeId>, parents: &[Option<NodeId>]) -> bool {
    let contains = |n: NodeId| frag.contains(&n) || extra == Some(n);
    let mut tops = 0;
    for &n in frag.iter().chain(extra.iter()) {
        match parents[n] {
            Some(p) if contains(p) => {}
            _ => tops += 1,
        }
    }
    tops == 1
}

pub fn align(amr: &AsGraph, tokens: &[Token], cfg: &AlignConfig) -> Alignment {
    let n_nodes = amr.node_count();
    let parents = skeleton_parents(amr);
    let mut node_to_token: Vec<Option<usize>> = vec![None; n_nodes];
    let mut lexical_node: DetMap<usize, NodeId> = DetMap::default();

    // Static Action-1 base scores.
    let mut bases: Vec<(NodeId, usize, f64)> = Vec::new();
    for node in 0..n_nodes {
        let Some(label) = amr.label(node) else { continue };
        for (t, token) in tokens.iter().enumerate() {
            let base = action1_base(cfg, label, &token.form);
            if base > 0.0 {
                bases.push((node, t + 1, base));
            }
        }
    }
    let competitors = |node: NodeId, token: usize| -> usize {
        bases
            .iter()
            .filter(|&&(n2, t2, _)| (n2 == node) != (t2 == token))
            .count()
    };

    loop {
        // Bonus for nearby structure already aligned nearby.
        let near = |node: NodeId, token: usize| -> bool {
            amr.edges().iter().any(|e| {
                let other = if e.from == node {
                    Some(e.to)
                } else if e.to == node {
                    Some(e.from)
                } else {
                    None
                };
                other
                    .and_then(|o| node_to_token[o])
                    .map_or(false, |t2| t2.abs_diff(token) <= 2)
            })
        };

        let mut best: Option<(f64, u8, NodeId, usize)> = None;
        let mut consider = |score: f64, kind: u8, node: NodeId, token: usize| {
            let cand = (score, kind, node, token);
            let better = match best {
                Some((bs, bk, bn, bt)) => {
                    score > bs
                        || (score == bs && (kind, node, token) < (bk, bn, bt))
                }
                None => true,
            };
            if better {
                best = Some(cand);
            }
        };

        for &(node, token, base) in &bases {
            if node_to_token[node].is_some() || lexical_node.contains_key(&token) {
                continue;
            }
            let mut score = base - cfg.conflict_penalty * competitors(node, token) as f64;
            if near(node, token) {
                score += cfg.neighbor_bonus;
            }
            consider(score, 0, node, token);
        }
        for e in amr.edges() {
            for (aligned, other, dir) in [
                (e.from, e.to, ExtendDirection::Down),
                (e.to, e.from, ExtendDirection::Up),
            ] {
                let Some(token) = node_to_token[aligned] else { continue };
                if node_to_token[other].is_some() {
                    continue;
                }
                let frag: Vec<NodeId> = (0..n_nodes)
                    .filter(|&m| node_to_token[m] == Some(token))
                    .collect();
                if !single_root(&frag, Some(other), &parents) {
                    continue;
                }
                let mut score = cfg.extend_base + cfg.extend_weight(&e.label, dir);
                if near(other, token) {
                    score += cfg.neighbor_bonus;
                }
                consider(score, 1, other, token);
            }
        }

        match best {
            Some((_, kind, node, token)) => {
                node_to_token[node] = Some(token);
                if kind == 0 {
                    lexical_node.insert(token, node);
                }
            }
            None => break,
        }
    }

    // Spread leftovers onto adjacent fragments where the single-root
    // condition allows it.
    let mut changed = true;
    while changed {
        changed = false;
        for node in 0..n_nodes {
            if node_to_token[node].is_some() {
                continue;
            }
            let mut neighbor_tokens: Vec<usize> = amr
                .edges()
                .iter()
                .filter_map(|e| {
                    if e.from == node {
                        node_to_token[e.to]
                    } else if e.to == node {
                        node_to_token[e.from]
                    } else {
                        None
                    }
                })
                .collect();
            neighbor_tokens.sort_unstable();
            neighbor_tokens.dedup();
            for token in neighbor_tokens {
                let frag: Vec<NodeId> = (0..n_nodes)
                    .filter(|&m| node_to_token[m] == Some(token))
                    .collect();
                if single_root(&frag, Some(node), &parents) {
                    node_to_token[node] = Some(token);
                    changed = true;
                    break;
                }
            }
        }
    }

    let unaligned = (0..n_nodes)
        .filter(|&n| node_to_token[n].is_none())
        .collect();
    Alignment {
        node_to_token,
        lexical_node,
        unaligned,
    }
}
