//! The type-unaware baseline: take the fixed-tree skeleton, then the
//! individually best supertag per token and the individually best label
//! per edge, with no type checks at all. If the guess is not a well-typed
//! tree, fall back to its largest well-typed subtree (token count, then
//! score, then lowest root index); everything outside the subtree is
//! re-tagged bottom under IGNORE edges from the subtree root.

use super::fixed_tree::fixed_tree_skeleton;
use super::{tree_score, DecodeError, DecodeResult, DecodeStatus, ScoreTable};
use crate::amdep::{AmDepTree, DepEdge, Supertag};
use crate::amtypes::EdgeOp;

pub fn type_unaware_decode(table: &ScoreTable) -> Result<DecodeResult, DecodeError> {
    table.validate()?;
    let n = table.n();
    let parent = fixed_tree_skeleton(table);

    // Individually highest-scoring supertag per token (bottom included).
    let tags: Vec<usize> = (1..=n)
        .map(|i| {
            table.candidates[i - 1]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.score.partial_cmp(&b.1.score).unwrap().then(b.0.cmp(&a.0)))
                .map(|(idx, _)| idx)
                .expect("validated tables have candidates")
        })
        .collect();

    // Individually highest-scoring label per skeleton edge, drawn from the
    // ops the table mentions for that pair (or anywhere, or IGNORE).
    let mut global_ops: Vec<EdgeOp> = table
        .label_scores
        .keys()
        .map(|(_, _, op)| op.clone())
        .collect();
    global_ops.sort();
    global_ops.dedup();
    let label_of = |i: usize, k: usize| -> EdgeOp {
        let mut local: Vec<EdgeOp> = table
            .label_scores
            .keys()
            .filter(|&&(li, lk, _)| li == i && lk == k)
            .map(|(_, _, op)| op.clone())
            .collect();
        local.sort();
        local.dedup();
        let pool: &[EdgeOp] = if !local.is_empty() {
            &local
        } else if !global_ops.is_empty() {
            &global_ops
        } else {
            std::slice::from_ref(&EdgeOp::Ignore)
        };
        pool.iter()
            .max_by(|a, b| {
                table
                    .label(i, k, a)
                    .partial_cmp(&table.label(i, k, b))
                    .unwrap()
                    .then(b.cmp(a))
            })
            .cloned()
            .expect("pool is nonempty")
    };

    let mut root = 0usize;
    let mut raw_edges: Vec<DepEdge> = Vec::new();
    for v in 1..=n {
        if parent[v] == 0 {
            root = v;
        } else {
            raw_edges.push(DepEdge {
                head: parent[v],
                dep: v,
                op: label_of(parent[v], v),
            });
        }
    }

    let supertag_at =
        |i: usize| -> Supertag { table.candidates[i - 1][tags[i - 1]].tag.clone() };

    // The raw guess may not even be structurally valid (bottom tags under
    // apply edges and the like); any such defect counts as "not
    // well-typed" for the baseline.
    let raw_tree = AmDepTree::new(
        table.tokens.clone(),
        (1..=n).map(supertag_at).collect(),
        raw_edges.clone(),
        root,
    );
    if let Ok(tree) = raw_tree {
        if let Some(deco) = tree.check_well_typed() {
            let status = if deco.root_type().is_empty() {
                DecodeStatus::ExactGoal
            } else {
                DecodeStatus::OpenSourceFallback(
                    deco.root_type().open_source_count().unwrap_or(usize::MAX),
                )
            };
            let score = tree_score(table, &tree);
            return Ok(DecodeResult {
                tree,
                score,
                status,
                items_built: 0,
            });
        }
    }

    // Largest well-typed subtree of the guess.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for v in 1..=n {
        if parent[v] != 0 {
            children[parent[v]].push(v);
        }
    }
    let mut best: Option<(usize, f64, usize, AmDepTree)> = None;
    for cand_root in 1..=n {
        let mut nodes = Vec::new();
        collect_subtree(cand_root, &children, &mut nodes);
        nodes.sort_unstable();
        let Some(tree) = subtree_as_full_tree(table, &nodes, cand_root, &raw_edges, &tags) else {
            continue;
        };
        if tree.check_well_typed().is_none() {
            continue;
        }
        let size = nodes.len();
        let score = tree_score(table, &tree);
        let better = match &best {
            Some((bs, bsc, broot, _)) => {
                size > *bs
                    || (size == *bs && score > *bsc)
                    || (size == *bs && score == *bsc && cand_root < *broot)
            }
            None => true,
        };
        if better {
            best = Some((size, score, cand_root, tree));
        }
    }
    let (_, score, _, tree) = best.ok_or(DecodeError::NoDerivation)?;
    Ok(DecodeResult {
        tree,
        score,
        status: DecodeStatus::SubtreeFallback,
        items_built: 0,
    })
}

fn collect_subtree(root: usize, children: &[Vec<usize>], out: &mut Vec<usize>) {
    out.push(root);
    for &c in &children[root] {
        collect_subtree(c, children, out);
    }
}

/// The guessed subtree, padded back to a full sentence: tokens outside it
/// become bottom under IGNORE edges from the subtree root.
fn subtree_as_full_tree(
    table: &ScoreTable,
    nodes: &[usize],
    sub_root: usize,
    raw_edges: &[DepEdge],
    tags: &[usize],
) -> Option<AmDepTree> {
    let n = table.n();
    let in_sub = |v: usize| nodes.binary_search(&v).is_ok();
    let mut supertags = Vec::with_capacity(n);
    for i in 1..=n {
        if in_sub(i) {
            supertags.push(table.candidates[i - 1][tags[i - 1]].tag.clone());
        } else {
            supertags.push(Supertag::Bottom);
        }
    }
    let mut edges: Vec<DepEdge> = raw_edges
        .iter()
        .filter(|e| in_sub(e.head) && in_sub(e.dep))
        .cloned()
        .collect();
    for i in 1..=n {
        if !in_sub(i) {
            edges.push(DepEdge {
                head: sub_root,
                dep: i,
                op: EdgeOp::Ignore,
            });
        }
    }
    AmDepTree::new(table.tokens.clone(), supertags, edges, sub_root).ok()
}
