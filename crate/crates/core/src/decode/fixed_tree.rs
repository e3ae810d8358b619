//! Fixed-tree decoding: commit to an unlabeled skeleton from the
//! attachment scores, then choose supertags and edge labels optimally for
//! that skeleton by a bottom-up subset walk.
//!
//! Items are (node, set of already-labeled children, type). A child none
//! of whose derivable types fits the head can always be killed instead:
//! its whole subtree is re-tagged bottom and every killed token hangs off
//! the head by an IGNORE edge, since bottom tokens are leaves. The kill
//! option always exists, so labeling never gets stuck.

use super::arena::{TypeArena, TypeId};
use super::cle::cle_arborescence_rooted;
use super::{tree_score, DecodeError, DecodeResult, DecodeStatus, ScoreTable};
use crate::amdep::{AmDepTree, DepEdge, Supertag};
use crate::amtypes::EdgeOp;

fn has_content(table: &ScoreTable, token: usize) -> bool {
    table.candidates[token - 1]
        .iter()
        .any(|c| !c.tag.is_bottom())
}

pub(crate) struct NodeCand {
    pub tid: TypeId,
    pub score: f64,
    pub cand_idx: usize,
}

/// Per token: the k best content candidates. Bottom is not listed; it
/// enters through the kill option, scored via [`ScoreTable::bottom_score`].
pub(crate) fn candidate_lists(
    table: &ScoreTable,
    k: usize,
    arena: &mut TypeArena,
) -> Vec<Vec<NodeCand>> {
    (1..=table.n())
        .map(|i| {
            table
                .top_k(i, k)
                .into_iter()
                .map(|cand_idx| {
                    let tag = &table.candidates[i - 1][cand_idx];
                    let t = match &tag.tag {
                        Supertag::Graph(g) => g.type_of(),
                        Supertag::Bottom => unreachable!("top_k filters bottom"),
                    };
                    NodeCand {
                        tid: arena.intern(&t),
                        score: tag.score,
                        cand_idx,
                    }
                })
                .collect()
        })
        .collect()
}

/// Children lists and a post-order over a parent array.
pub(crate) fn skeleton_orders(parent: &[usize]) -> (Vec<Vec<usize>>, Vec<usize>, usize) {
    let n = parent.len() - 1;
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    let mut root = 0;
    for v in 1..=n {
        if parent[v] == 0 {
            root = v;
        } else {
            children[parent[v]].push(v);
        }
    }
    let mut post = Vec::with_capacity(n);
    let mut stack = vec![(root, false)];
    while let Some((u, expanded)) = stack.pop() {
        if expanded {
            post.push(u);
        } else {
            stack.push((u, true));
            for &c in children[u].iter().rev() {
                stack.push((c, false));
            }
        }
    }
    (children, post, root)
}

/// Tokens of each node's subtree, ascending.
fn subtree_tokens(children: &[Vec<usize>], post: &[usize]) -> Vec<Vec<usize>> {
    let n = children.len() - 1;
    let mut subs: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for &node in post {
        let mut tokens = vec![node];
        for &c in &children[node] {
            tokens.extend_from_slice(&subs[c]);
        }
        tokens.sort_unstable();
        subs[node] = tokens;
    }
    subs
}

/// Cost of killing the whole subtree under `child` from head `head`:
/// every token goes bottom and takes an IGNORE edge from the head.
fn kill_cost(table: &ScoreTable, head: usize, sub: &[usize]) -> f64 {
    sub.iter()
        .map(|&t| {
            table.bottom_score(t)
                + table.edge(head, t)
                + table.label(head, t, &EdgeOp::Ignore)
        })
        .sum()
}

/// Reusable buffers for the score-only walk, so oracle sweeps over many
/// skeletons do not churn the allocator.
#[derive(Default)]
pub(crate) struct DpScratch {
    pub(crate) finals: Vec<Vec<(TypeId, f64)>>,
    states: Vec<Vec<(TypeId, f64)>>,
}

fn upsert(list: &mut Vec<(TypeId, f64)>, tid: TypeId, score: f64) {
    for entry in list.iter_mut() {
        if entry.0 == tid {
            if score > entry.1 {
                entry.1 = score;
            }
            return;
        }
    }
    list.push((tid, score));
}

/// Best score per content result type at the skeleton root, without
/// backpointers. Returns the root token; results are left in
/// `scratch.finals[root-1]`. An empty root list means nothing decodable.
pub(crate) fn skeleton_scores(
    table: &ScoreTable,
    parent: &[usize],
    cands: &[Vec<NodeCand>],
    arena: &mut TypeArena,
    scratch: &mut DpScratch,
    items: &mut usize,
) -> usize {
    let n = parent.len() - 1;
    let (children, post, root) = skeleton_orders(parent);
    let subs = subtree_tokens(&children, &post);
    scratch.finals.resize(n, Vec::new());
    for f in scratch.finals.iter_mut() {
        f.clear();
    }
    let plain_labels = table.label_scores.is_empty();

    for &node in &post {
        let kids = &children[node];
        if kids.is_empty() {
            for c in &cands[node - 1] {
                upsert(&mut scratch.finals[node - 1], c.tid, c.score);
            }
            *items += scratch.finals[node - 1].len();
            continue;
        }
        let d = kids.len();
        let full = 1usize << d;
        if scratch.states.len() < full {
            scratch.states.resize(full, Vec::new());
        }
        for s in scratch.states[..full].iter_mut() {
            s.clear();
        }
        for c in &cands[node - 1] {
            upsert(&mut scratch.states[0], c.tid, c.score);
        }
        let mut frontier: Vec<(TypeId, f64)> = Vec::new();
        for mask in 0..full {
            if scratch.states[mask].is_empty() {
                continue;
            }
            *items += scratch.states[mask].len();
            frontier.clear();
            frontier.extend_from_slice(&scratch.states[mask]);
            for (p, &child) in kids.iter().enumerate() {
                if mask & (1 << p) != 0 {
                    continue;
                }
                let e_score = table.edge(node, child);
                let kill = kill_cost(table, node, &subs[child]);
                for &(tid, s) in &frontier {
                    for fi in 0..scratch.finals[child - 1].len() {
                        let (ctid, cs) = scratch.finals[child - 1][fi];
                        let combos = arena.combos(tid, ctid);
                        for (op, res) in combos.iter() {
                            let l_score = if plain_labels {
                                table.label_default
                            } else {
                                table.label(node, child, op)
                            };
                            upsert(
                                &mut scratch.states[mask | (1 << p)],
                                *res,
                                s + cs + e_score + l_score,
                            );
                        }
                    }
                    upsert(&mut scratch.states[mask | (1 << p)], tid, s + kill);
                }
            }
        }
        scratch.finals[node - 1] = std::mem::take(&mut scratch.states[full - 1]);
    }
    root
}

#[derive(Clone)]
enum Bp {
    Start {
        cand_idx: usize,
    },
    Step {
        prev_tid: TypeId,
        child_pos: usize,
        op: EdgeOp,
        child_tid: TypeId,
    },
    Kill {
        prev_tid: TypeId,
        child_pos: usize,
    },
}

/// Full walk with backpointers; picks the best root item (empty type if
/// one exists, otherwise fewest open sources then score) and rebuilds the
/// tree, expanding kills into bottom leaves under the killing head.
pub(crate) fn skeleton_decode(
    table: &ScoreTable,
    parent: &[usize],
    cands: &[Vec<NodeCand>],
    arena: &mut TypeArena,
    items: &mut usize,
) -> Result<DecodeResult, DecodeError> {
    let n = parent.len() - 1;
    let (children, post, root) = skeleton_orders(parent);
    let subs = subtree_tokens(&children, &post);

    let mut states: Vec<Vec<Vec<(TypeId, f64, Bp)>>> = (0..=n).map(|_| Vec::new()).collect();
    let mut finals: Vec<Vec<(TypeId, f64)>> = vec![Vec::new(); n + 1];

    for &node in &post {
        let kids = &children[node];
        let d = kids.len();
        let full = 1usize << d;
        let mut node_states: Vec<Vec<(TypeId, f64, Bp)>> =
            (0..full).map(|_| Vec::new()).collect();
        for c in &cands[node - 1] {
            bp_upsert(
                &mut node_states[0],
                c.tid,
                c.score,
                Bp::Start {
                    cand_idx: c.cand_idx,
                },
            );
        }
        for mask in 0..full {
            *items += node_states[mask].len();
            let frontier: Vec<(TypeId, f64)> = node_states[mask]
                .iter()
                .map(|&(tid, s, _)| (tid, s))
                .collect();
            for (p, &child) in kids.iter().enumerate() {
                if mask & (1 << p) != 0 {
                    continue;
                }
                let e_score = table.edge(node, child);
                let kill = kill_cost(table, node, &subs[child]);
                for &(tid, s) in &frontier {
                    for fi in 0..finals[child].len() {
                        let (ctid, cs) = finals[child][fi];
                        let combos = arena.combos(tid, ctid);
                        for (op, res) in combos.iter() {
                            let total = s + cs + e_score + table.label(node, child, op);
                            bp_upsert(
                                &mut node_states[mask | (1 << p)],
                                *res,
                                total,
                                Bp::Step {
                                    prev_tid: tid,
                                    child_pos: p,
                                    op: op.clone(),
                                    child_tid: ctid,
                                },
                            );
                        }
                    }
                    bp_upsert(
                        &mut node_states[mask | (1 << p)],
                        tid,
                        s + kill,
                        Bp::Kill {
                            prev_tid: tid,
                            child_pos: p,
                        },
                    );
                }
            }
        }
        finals[node] = node_states[full - 1]
            .iter()
            .map(|&(tid, s, _)| (tid, s))
            .collect();
        states[node] = node_states;
    }

    // Root selection: empty type wins; otherwise fewest open sources, then
    // higher score. No root item at all means nothing was decodable.
    let root_finals = &finals[root];
    let goal = root_finals
        .iter()
        .find(|&&(tid, _)| tid == arena.empty)
        .copied();
    let (chosen_tid, status) = match goal {
        Some((tid, _)) => (tid, DecodeStatus::ExactGoal),
        None => {
            let best = root_finals
                .iter()
                .min_by(|a, b| {
                    let oa = arena.open_sources(a.0);
                    let ob = arena.open_sources(b.0);
                    oa.cmp(&ob)
                        .then(b.1.partial_cmp(&a.1).unwrap())
                        .then(a.0.cmp(&b.0))
                })
                .copied()
                .ok_or(DecodeError::NoDerivation)?;
            (
                best.0,
                DecodeStatus::OpenSourceFallback(arena.open_sources(best.0)),
            )
        }
    };

    // Rebuild assignments by walking backpointers.
    let mut tags: Vec<Option<usize>> = vec![None; n + 1];
    let mut edges: Vec<DepEdge> = Vec::new();
    let mut stack = vec![(root, chosen_tid)];
    while let Some((node, mut tid)) = stack.pop() {
        let d = children[node].len();
        let mut mask = (1usize << d) - 1;
        loop {
            let entry = states[node][mask]
                .iter()
                .find(|&&(t, _, _)| t == tid)
                .expect("backpointer chain is complete");
            match entry.2.clone() {
                Bp::Start { cand_idx } => {
                    tags[node] = Some(cand_idx);
                    break;
                }
                Bp::Step {
                    prev_tid,
                    child_pos,
                    op,
                    child_tid,
                } => {
                    let child = children[node][child_pos];
                    edges.push(DepEdge {
                        head: node,
                        dep: child,
                        op,
                    });
                    stack.push((child, child_tid));
                    tid = prev_tid;
                    mask &= !(1 << child_pos);
                }
                Bp::Kill {
                    prev_tid,
                    child_pos,
                } => {
                    let child = children[node][child_pos];
                    for &t in &subs[child] {
                        edges.push(DepEdge {
                            head: node,
                            dep: t,
                            op: EdgeOp::Ignore,
                        });
                    }
                    tid = prev_tid;
                    mask &= !(1 << child_pos);
                }
            }
        }
    }

    let supertags: Vec<Supertag> = (1..=n)
        .map(|i| match tags[i] {
            Some(cand_idx) => table.candidates[i - 1][cand_idx].tag.clone(),
            None => Supertag::Bottom,
        })
        .collect();
    let tree = AmDepTree::new(table.tokens.clone(), supertags, edges, root)?;
    let score = tree_score(table, &tree);
    Ok(DecodeResult {
        tree,
        score,
        status,
        items_built: *items,
    })
}

fn bp_upsert(list: &mut Vec<(TypeId, f64, Bp)>, tid: TypeId, score: f64, bp: Bp) {
    for entry in list.iter_mut() {
        if entry.0 == tid {
            if score > entry.1 {
                entry.1 = score;
                entry.2 = bp;
            }
            return;
        }
    }
    list.push((tid, score, bp));
}

/// Greedy spanning fallback for attachment matrices without a finite
/// spanning arborescence: every token takes its best finite parent, cycles
/// drop their weakest edge, and the leftover component roots attach under
/// the token the virtual root likes best.
pub(crate) fn forest_fallback(table: &ScoreTable) -> Vec<usize> {
    let n = table.n();
    let mut parent = vec![0usize; n + 1];
    for k in 1..=n {
        let mut best: Option<(f64, usize)> = None;
        for i in 1..=n {
            if i == k {
                continue;
            }
            let w = table.edge(i, k);
            if w.is_finite() && best.map_or(true, |(bw, _)| w > bw) {
                best = Some((w, i));
            }
        }
        parent[k] = best.map_or(0, |(_, i)| i);
    }
    // Break cycles by dropping the weakest edge in each.
    loop {
        let mut stamp = vec![0usize; n + 1];
        let mut broke = false;
        for start in 1..=n {
            if stamp[start] != 0 {
                continue;
            }
            let mut u = start;
            while u != 0 && stamp[u] == 0 {
                stamp[u] = start;
                u = parent[u];
            }
            if u != 0 && stamp[u] == start {
                let mut weakest = (f64::INFINITY, u);
                let mut x = u;
                loop {
                    let w = table.edge(parent[x], x);
                    if w < weakest.0 || (w == weakest.0 && x < weakest.1) {
                        weakest = (w, x);
                    }
                    x = parent[x];
                    if x == u {
                        break;
                    }
                }
                parent[weakest.1] = 0;
                broke = true;
            }
        }
        if !broke {
            break;
        }
    }
    let roots: Vec<usize> = (1..=n).filter(|&k| parent[k] == 0).collect();
    // Prefer component roots that can carry content; the sentence root
    // must, or nothing is decodable at all.
    let capable: Vec<usize> = roots
        .iter()
        .copied()
        .filter(|&r| has_content(table, r))
        .collect();
    let chosen = capable
        .iter()
        .chain(roots.iter())
        .copied()
        .max_by(|&a, &b| {
            (has_content(table, a), table.edge(0, a), std::cmp::Reverse(a))
                .partial_cmp(&(has_content(table, b), table.edge(0, b), std::cmp::Reverse(b)))
                .unwrap()
        })
        .expect("at least one component root exists");
    for r in roots {
        if r != chosen {
            parent[r] = chosen;
        }
    }
    parent
}

/// Fixed-tree decoding: a maximum-arborescence skeleton from the
/// attachment scores (root out-degree one), labeled bottom-up with the `k`
/// best supertags per token plus the kill option.
pub fn fixed_tree_decode(table: &ScoreTable, k: usize) -> Result<DecodeResult, DecodeError> {
    table.validate()?;
    if k == 0 {
        return Err(DecodeError::BadK);
    }
    let parent = fixed_tree_skeleton(table);
    let mut arena = TypeArena::new();
    let cands = candidate_lists(table, k, &mut arena);
    let mut items = 0usize;
    skeleton_decode(table, &parent, &cands, &mut arena, &mut items)
}

/// The unlabeled skeleton the fixed-tree decoder commits to: the maximum
/// arborescence whose root can carry content, or the greedy spanning
/// fallback when none exists.
pub fn fixed_tree_skeleton(table: &ScoreTable) -> Vec<usize> {
    cle_arborescence_rooted(table.n(), |i, j| table.edge(i, j), |r| has_content(table, r))
        .unwrap_or_else(|| forest_fallback(table))
}
