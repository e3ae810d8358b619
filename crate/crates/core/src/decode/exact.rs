//! Exact decoding by skeleton enumeration.
//!
//! Well-typed decoding is NP-hard (see the Hamiltonian-path reduction in
//! this module's sibling), so the exact decoder is an oracle with a size
//! guard, not a feature: it enumerates every rooted unlabeled tree over
//! the tokens and labels each optimally with the same subset walk the
//! fixed-tree decoder uses. A per-skeleton upper bound (best supertag per
//! token plus best edge+label per skeleton edge) prunes the scan once a
//! goal derivation is in hand.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::arena::TypeArena;
use super::fixed_tree::{candidate_lists, skeleton_decode, skeleton_scores, DpScratch};
use super::{DecodeError, DecodeResult, ScoreTable};

pub const EXACT_GUARD_DEFAULT: usize = 10;

/// All rooted trees over `1..=n` as parent arrays (index 0 unused, root's
/// parent is 0), deepest trees first. Cached per `n`; these lists are the
/// bottleneck data for oracle sweeps.
fn skeletons(n: usize) -> Arc<Vec<Vec<u8>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Vec<u8>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(found) = cache.lock().unwrap().get(&n) {
        return Arc::clone(found);
    }
    let mut all: Vec<Vec<u8>> = Vec::new();
    let mut parent = vec![0u8; n + 1];
    for root in 1..=n {
        assign(n, root, 1, &mut parent, &mut all);
    }
    // Deepest first: long chains are tried before stars, which finds goal
    // derivations early for chain-shaped type systems.
    let mut keyed: Vec<(usize, Vec<u8>)> = all
        .into_iter()
        .map(|p| (max_depth(&p), p))
        .collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let result = Arc::new(keyed.into_iter().map(|(_, p)| p).collect::<Vec<_>>());
    cache.lock().unwrap().insert(n, Arc::clone(&result));
    result
}

fn assign(n: usize, root: usize, v: usize, parent: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if v > n {
        if is_tree(n, root, parent) {
            out.push(parent.clone());
        }
        return;
    }
    if v == root {
        parent[v] = 0;
        assign(n, root, v + 1, parent, out);
        return;
    }
    for p in 1..=n {
        if p != v {
            parent[v] = p as u8;
            assign(n, root, v + 1, parent, out);
        }
    }
}

fn is_tree(n: usize, root: usize, parent: &[u8]) -> bool {
    for start in 1..=n {
        let mut u = start;
        let mut steps = 0;
        while u != root {
            u = parent[u] as usize;
            steps += 1;
            if steps > n {
                return false;
            }
        }
    }
    true
}

fn max_depth(parent: &[u8]) -> usize {
    let n = parent.len() - 1;
    (1..=n)
        .map(|start| {
            let mut u = start;
            let mut d = 0;
            while parent[u] != 0 {
                u = parent[u] as usize;
                d += 1;
            }
            d
        })
        .max()
        .unwrap_or(0)
}

/// Exhaustive maximization of the factored objective over all supertag
/// assignments and labeled dependency trees, subject to well-typedness.
/// Same goal and fallback rule as the approximations. `guard` caps the
/// sentence length.
pub fn exact_decode(table: &ScoreTable, guard: usize) -> Result<DecodeResult, DecodeError> {
    table.validate()?;
    let n = table.n();
    if n > guard {
        return Err(DecodeError::GuardExceeded { n, guard });
    }
    let mut arena = TypeArena::new();
    let cands = candidate_lists(table, usize::MAX, &mut arena);
    let skels = skeletons(n);

    // Upper bound per skeleton: per token the better of its best content
    // tag and bottom, plus per non-root token the best edge+label score
    // over its skeleton ancestors. Ancestors, not just the parent: a
    // killed token's IGNORE edge is charged from whichever ancestor kills
    // its subtree.
    let tag_max: f64 = (1..=n)
        .map(|i| {
            cands[i - 1]
                .iter()
                .map(|x| x.score)
                .fold(table.bottom_score(i), f64::max)
        })
        .sum();
    let mut pair_max = vec![vec![f64::NEG_INFINITY; n + 1]; n + 1];
    for i in 1..=n {
        for k in 1..=n {
            if i == k {
                continue;
            }
            let mut best_label = table.label_default;
            for (&(li, lk, _), &s) in &table.label_scores {
                if li == i && lk == k && s > best_label {
                    best_label = s;
                }
            }
            pair_max[i][k] = table.edge(i, k) + best_label;
        }
    }
    let bound = |parent: &[u8]| -> f64 {
        let mut b = tag_max;
        for v in 1..=n {
            if parent[v] == 0 {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            let mut h = parent[v] as usize;
            loop {
                if pair_max[h][v] > best {
                    best = pair_max[h][v];
                }
                if parent[h] == 0 {
                    break;
                }
                h = parent[h] as usize;
            }
            b += best;
        }
        b
    };

    let mut order: Vec<(f64, u32)> = skels
        .iter()
        .enumerate()
        .map(|(i, p)| (bound(p), i as u32))
        .collect();
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    // Scanning in descending bound order lets us stop once no remaining
    // skeleton can beat the best result — but only when the best already
    // has the minimum open-source count any derivation could reach, since
    // the bound says nothing about openness. That minimum comes from the
    // closure of the candidate types under the operations.
    let min_open_reachable = reachable_min_open(&cands, &mut arena);

    let mut scratch = DpScratch::default();
    let mut items = 0usize;
    let mut parent_usize = vec![0usize; n + 1];
    let mut best: Option<(usize, f64, u32)> = None;

    for &(b, idx) in &order {
        if let Some((open, score, _)) = best {
            if Some(open) == min_open_reachable && b <= score {
                break;
            }
        }
        let parent = &skels[idx as usize];
        for v in 1..=n {
            parent_usize[v] = parent[v] as usize;
        }
        let root =
            skeleton_scores(table, &parent_usize, &cands, &mut arena, &mut scratch, &mut items);
        for &(tid, s) in &scratch.finals[root - 1] {
            let open = arena.open_sources(tid);
            let better = match best {
                Some((bo, bs, _)) => open < bo || (open == bo && s > bs),
                None => true,
            };
            if better {
                best = Some((open, s, idx));
            }
        }
    }

    let (_, _, winner) = best.ok_or(DecodeError::NoDerivation)?;
    let parent = &skels[winner as usize];
    for v in 1..=n {
        parent_usize[v] = parent[v] as usize;
    }
    skeleton_decode(table, &parent_usize, &cands, &mut arena, &mut items)
}

/// The smallest open-source count any composed value could have, from the
/// closure of candidate types under the operations. `None` when the
/// closure grows past a size cap; pruning is then disabled.
fn reachable_min_open(
    cands: &[Vec<super::fixed_tree::NodeCand>],
    arena: &mut TypeArena,
) -> Option<usize> {
    const CAP: usize = 256;
    let mut seen: Vec<super::arena::TypeId> = Vec::new();
    for list in cands {
        for c in list {
            if !seen.contains(&c.tid) {
                seen.push(c.tid);
            }
        }
    }
    let mut frontier = seen.clone();
    while let Some(t) = frontier.pop() {
        if seen.len() > CAP {
            return None;
        }
        let snapshot = seen.clone();
        for &u in &snapshot {
            for (a, b) in [(t, u), (u, t)] {
                for (_, res) in arena.combos(a, b).iter() {
                    if !seen.contains(res) {
                        seen.push(*res);
                        frontier.push(*res);
                    }
                }
            }
        }
    }
    seen.iter()
        .map(|&t| arena.open_sources(t))
        .min()
}
