//! Smatch: triple-overlap F-score between two AMRs under the best
//! variable mapping, found by seeded hill-climbing with random restarts.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::asgraph::{AsGraph, NodeId};
use crate::util::DetMap;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmatchScore {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    pub matched: usize,
    pub pred_triples: usize,
    pub gold_triples: usize,
}

pub fn f_from_counts(matched: usize, pred: usize, gold: usize) -> SmatchScore {
    let precision = if pred == 0 { 0.0 } else { matched as f64 / pred as f64 };
    let recall = if gold == 0 { 0.0 } else { matched as f64 / gold as f64 };
    let f = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    SmatchScore {
        precision,
        recall,
        f,
        matched,
        pred_triples: pred,
        gold_triples: gold,
    }
}

/// The triple view of a source-free graph. Variables are instance nodes;
/// constant leaves become attribute values.
pub(crate) struct Triples {
    /// Instance label per variable (dense ids 0..v).
    pub labels: Vec<String>,
    /// (from-var, role, to-var).
    pub relations: Vec<(usize, String, usize)>,
    /// (var, role, constant text).
    pub attributes: Vec<(usize, String, String)>,
}

impl Triples {
    pub fn total(&self) -> usize {
        self.labels.len() + self.relations.len() + self.attributes.len()
    }
}

fn is_constant_leaf(g: &AsGraph, node: NodeId) -> bool {
    let Some(label) = g.label(node) else {
        return false;
    };
    let constant = label.starts_with('"')
        || label.parse::<f64>().is_ok()
        || matches!(label, "-" | "+" | "imperative" | "expressive" | "interrogative");
    constant && !g.edges().iter().any(|e| e.from == node) && node != g.root()
}

pub(crate) fn triples(g: &AsGraph) -> Triples {
    let mut var_id: Vec<Option<usize>> = vec![None; g.node_count()];
    let mut labels = Vec::new();
    for node in 0..g.node_count() {
        if !is_constant_leaf(g, node) {
            var_id[node] = Some(labels.len());
            labels.push(g.label(node).unwrap_or("<unlabeled>").to_string());
        }
    }
    let mut relations = Vec::new();
    let mut attributes = Vec::new();
    for e in g.edges() {
        let from = var_id[e.from].expect("constants have no outgoing edges");
        match var_id[e.to] {
            Some(to) => relations.push((from, e.label.clone(), to)),
            None => attributes.push((
                from,
                e.label.clone(),
                g.label(e.to).unwrap().to_string(),
            )),
        }
    }
    Triples {
        labels,
        relations,
        attributes,
    }
}

/// Matched triples under a (partial injective) mapping from pred vars to
/// gold vars. `usize::MAX` marks unmapped.
pub(crate) fn matched(pred: &Triples, gold: &Triples, map: &[usize]) -> usize {
    let mut gold_rel: DetMap<(usize, &str, usize), usize> = DetMap::default();
    for (a, r, b) in &gold.relations {
        *gold_rel.entry((*a, r.as_str(), *b)).or_default() += 1;
    }
    let mut gold_attr: DetMap<(usize, &str, &str), usize> = DetMap::default();
    for (a, r, c) in &gold.attributes {
        *gold_attr.entry((*a, r.as_str(), c.as_str())).or_default() += 1;
    }
    let mut count = 0usize;
    for (v, label) in pred.labels.iter().enumerate() {
        let g = map[v];
        if g != usize::MAX && &gold.labels[g] == label {
            count += 1;
        }
    }
    for (a, r, b) in &pred.relations {
        let (ga, gb) = (map[*a], map[*b]);
        if ga != usize::MAX && gb != usize::MAX {
            if let Some(c) = gold_rel.get_mut(&(ga, r.as_str(), gb)) {
                if *c > 0 {
                    *c -= 1;
                    count += 1;
                }
            }
        }
    }
    for (a, r, c) in &pred.attributes {
        let ga = map[*a];
        if ga != usize::MAX {
            if let Some(cnt) = gold_attr.get_mut(&(ga, r.as_str(), c.as_str())) {
                if *cnt > 0 {
                    *cnt -= 1;
                    count += 1;
                }
            }
        }
    }
    count
}

/// Seeded hill-climbing Smatch with `restarts` random restarts plus one
/// label-greedy start. Deterministic for a fixed seed.
pub fn smatch(pred: &AsGraph, gold: &AsGraph, restarts: usize, seed: u64) -> SmatchScore {
    let p = triples(pred);
    let g = triples(gold);
    let best = best_mapping_score(&p, &g, restarts, seed);
    f_from_counts(best, p.total(), g.total())
}

pub(crate) fn best_mapping_score(p: &Triples, g: &Triples, restarts: usize, seed: u64) -> usize {
    let np = p.labels.len();
    let ng = g.labels.len();
    if np == 0 || ng == 0 {
        return 0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0usize;
    for start in 0..=restarts {
        let mut map = if start == 0 {
            greedy_start(p, g)
        } else {
            random_start(np, ng, &mut rng)
        };
        let mut current = matched(p, g, &map);
        loop {
            let (next_map, next_score) = best_neighbor(p, g, &map, current);
            if next_score > current {
                map = next_map;
                current = next_score;
            } else {
                break;
            }
        }
        if current > best {
            best = current;
        }
    }
    best
}

fn greedy_start(p: &Triples, g: &Triples) -> Vec<usize> {
    let mut map = vec![usize::MAX; p.labels.len()];
    let mut used = vec![false; g.labels.len()];
    for (v, label) in p.labels.iter().enumerate() {
        if let Some(gv) = (0..g.labels.len()).find(|&i| !used[i] && g.labels[i] == *label) {
            map[v] = gv;
            used[gv] = true;
        }
    }
    map
}

fn random_start(np: usize, ng: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut targets: Vec<usize> = (0..ng).collect();
    targets.shuffle(rng);
    (0..np)
        .map(|v| targets.get(v).copied().unwrap_or(usize::MAX))
        .collect()
}

/// Best single move: remap one variable (to any free gold var or to
/// nothing) or swap two variables' images.
fn best_neighbor(p: &Triples, g: &Triples, map: &[usize], current: usize) -> (Vec<usize>, usize) {
    let np = map.len();
    let ng = g.labels.len();
    let mut used = vec![false; ng];
    for &m in map {
        if m != usize::MAX {
            used[m] = true;
        }
    }
    let mut best_map = map.to_vec();
    let mut best_score = current;
    let mut trial = map.to_vec();
    for v in 0..np {
        let old = trial[v];
        for target in (0..ng).chain([usize::MAX]) {
            if target == old || (target != usize::MAX && used[target]) {
                continue;
            }
            trial[v] = target;
            let s = matched(p, g, &trial);
            if s > best_score {
                best_score = s;
                best_map = trial.clone();
            }
        }
        trial[v] = old;
        for w in (v + 1)..np {
            trial.swap(v, w);
            let s = matched(p, g, &trial);
            if s > best_score {
                best_score = s;
                best_map = trial.clone();
            }
            trial.swap(v, w);
        }
    }
    (best_map, best_score)
}

/// Exhaustive best mapping for small graphs; the correctness oracle for
/// the hill climber.
pub fn smatch_exhaustive(pred: &AsGraph, gold: &AsGraph) -> SmatchScore {
    let p = triples(pred);
    let g = triples(gold);
    let np = p.labels.len();
    let ng = g.labels.len();
    let mut best = 0usize;
    let mut map = vec![usize::MAX; np];
    let mut used = vec![false; ng];
    fn rec(
        v: usize,
        p: &Triples,
        g: &Triples,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut usize,
    ) {
        if v == map.len() {
            let s = matched(p, g, map);
            if s > *best {
                *best = s;
            }
            return;
        }
        map[v] = usize::MAX;
        rec(v + 1, p, g, map, used, best);
        for t in 0..used.len() {
            if !used[t] {
                used[t] = true;
                map[v] = t;
                rec(v + 1, p, g, map, used, best);
                used[t] = false;
            }
        }
        map[v] = usize::MAX;
    }
    rec(0, &p, &g, &mut map, &mut used, &mut best);
    f_from_counts(best, p.total(), g.total())
}
