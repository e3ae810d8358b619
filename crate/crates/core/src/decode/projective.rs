//! Projective chart decoding.
//!
//! Items are (span, head token, type) with the best score per key. Init
//! seeds single-token spans from the k-best supertags; Arc rules combine
//! adjacent spans with every operation the two types admit, the left or
//! right head becoming the head of the union; Skip rules stretch a span
//! over a token tagged bottom, charging its bottom score plus an IGNORE
//! edge from the item's head. The goal is a full-span item of empty type;
//! when none exists the full-span item with the fewest open sources (then
//! the best score) is returned instead.

use super::arena::{TypeArena, TypeId};
use super::{tree_score, DecodeError, DecodeResult, DecodeStatus, ScoreTable};
use crate::amdep::{AmDepTree, DepEdge, Supertag};
use crate::amtypes::EdgeOp;
use crate::util::DetMap;

type Head = u16;

#[derive(Clone)]
enum Bp {
    Init {
        cand_idx: usize,
    },
    Arc {
        split: usize,
        op: EdgeOp,
        head_left: bool,
        left: (Head, TypeId),
        right: (Head, TypeId),
    },
    /// Span grew rightward over the bottom token `k-1`.
    SkipRight,
    /// Span grew leftward over the bottom token `i`.
    SkipLeft,
}

#[derive(Clone)]
struct Item {
    score: f64,
    bp: Bp,
}

type Cell = DetMap<(Head, TypeId), Item>;

struct Chart {
    n: usize,
    cells: Vec<Cell>,
}

impl Chart {
    fn new(n: usize) -> Self {
        Chart {
            n,
            cells: vec![Cell::default(); (n + 2) * (n + 2)],
        }
    }

    fn idx(&self, i: usize, k: usize) -> usize {
        i * (self.n + 2) + k
    }

    fn cell(&self, i: usize, k: usize) -> &Cell {
        &self.cells[self.idx(i, k)]
    }

    fn cell_mut(&mut self, i: usize, k: usize) -> &mut Cell {
        let idx = self.idx(i, k);
        &mut self.cells[idx]
    }
}

fn upsert(cell: &mut Cell, key: (Head, TypeId), score: f64, bp: Bp) -> bool {
    match cell.get_mut(&key) {
        Some(existing) => {
            if score > existing.score {
                existing.score = score;
                existing.bp = bp;
            }
            false
        }
        None => {
            cell.insert(key, Item { score, bp });
            true
        }
    }
}

/// Chart decoding over the `k` best supertags per token plus bottom.
pub fn projective_decode(table: &ScoreTable, k: usize) -> Result<DecodeResult, DecodeError> {
    table.validate()?;
    if k == 0 {
        return Err(DecodeError::BadK);
    }
    let n = table.n();
    let mut arena = TypeArena::new();
    let mut chart = Chart::new(n);
    let mut items_built = 0usize;

    // Init: one item per k-best content supertag.
    for i in 1..=n {
        let mut cell = Cell::default();
        for cand_idx in table.top_k(i, k) {
            let cand = &table.candidates[i - 1][cand_idx];
            let t = cand.tag.graph().expect("top_k yields content tags").type_of();
            let tid = arena.intern(&t);
            upsert(&mut cell, (i as Head, tid), cand.score, Bp::Init { cand_idx });
        }
        items_built += cell.len();
        *chart.cell_mut(i, i + 1) = cell;
    }

    for width in 2..=n {
        for i in 1..=(n + 1 - width) {
            let k_end = i + width;
            let mut cell = Cell::default();

            // Arc rules over every split point.
            for j in (i + 1)..k_end {
                let left_items: Vec<(Head, TypeId, f64)> = chart
                    .cell(i, j)
                    .iter()
                    .map(|(&(r, t), it)| (r, t, it.score))
                    .collect();
                let right_items: Vec<(Head, TypeId, f64)> = chart
                    .cell(j, k_end)
                    .iter()
                    .map(|(&(r, t), it)| (r, t, it.score))
                    .collect();
                for &(r1, t1, s1) in &left_items {
                    for &(r2, t2, s2) in &right_items {
                        let combos = arena.combos(t1, t2);
                        for (op, res) in combos.iter() {
                            let score = s1
                                + s2
                                + table.edge(r1 as usize, r2 as usize)
                                + table.label(r1 as usize, r2 as usize, op);
                            if upsert(
                                &mut cell,
                                (r1, *res),
                                score,
                                Bp::Arc {
                                    split: j,
                                    op: op.clone(),
                                    head_left: true,
                                    left: (r1, t1),
                                    right: (r2, t2),
                                },
                            ) {
                                items_built += 1;
                            }
                        }
                        let combos = arena.combos(t2, t1);
                        for (op, res) in combos.iter() {
                            let score = s1
                                + s2
                                + table.edge(r2 as usize, r1 as usize)
                                + table.label(r2 as usize, r1 as usize, op);
                            if upsert(
                                &mut cell,
                                (r2, *res),
                                score,
                                Bp::Arc {
                                    split: j,
                                    op: op.clone(),
                                    head_left: false,
                                    left: (r1, t1),
                                    right: (r2, t2),
                                },
                            ) {
                                items_built += 1;
                            }
                        }
                    }
                }
            }

            // Skip rules: stretch over a bottom token at either edge.
            let skip_right: Vec<((Head, TypeId), f64)> = chart
                .cell(i, k_end - 1)
                .iter()
                .map(|(&key, it)| (key, it.score))
                .collect();
            for ((r, t), s) in skip_right {
                let tok = k_end - 1;
                let score = s
                    + table.bottom_score(tok)
                    + table.edge(r as usize, tok)
                    + table.label(r as usize, tok, &EdgeOp::Ignore);
                if upsert(&mut cell, (r, t), score, Bp::SkipRight) {
                    items_built += 1;
                }
            }
            let skip_left: Vec<((Head, TypeId), f64)> = chart
                .cell(i + 1, k_end)
                .iter()
                .map(|(&key, it)| (key, it.score))
                .collect();
            for ((r, t), s) in skip_left {
                let score = s
                    + table.bottom_score(i)
                    + table.edge(r as usize, i)
                    + table.label(r as usize, i, &EdgeOp::Ignore);
                if upsert(&mut cell, (r, t), score, Bp::SkipLeft) {
                    items_built += 1;
                }
            }

            *chart.cell_mut(i, k_end) = cell;
        }
    }

    // Goal selection: full-span empty-type items by score; otherwise the
    // open-source-minimizing fallback. Exact score ties break on the
    // lexicographically smallest extracted tree.
    let full = chart.cell(1, n + 1);
    if full.is_empty() {
        return Err(DecodeError::NoDerivation);
    }
    let goal_keys: Vec<(Head, TypeId)> = {
        let mut keys: Vec<(Head, TypeId)> = full
            .iter()
            .filter(|(&(_, t), _)| t == arena.empty)
            .map(|(&key, _)| key)
            .collect();
        keys.sort();
        keys
    };
    let (chosen, status) = if goal_keys.is_empty() {
        let mut keys: Vec<(usize, f64, (Head, TypeId))> = full
            .iter()
            .map(|(&key, it)| (arena.open_sources(key.1), it.score, key))
            .collect();
        keys.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then(b.1.partial_cmp(&a.1).unwrap())
                .then(a.2.cmp(&b.2))
        });
        let open = keys[0].0;
        let best: Vec<(Head, TypeId)> = keys
            .iter()
            .take_while(|k| k.0 == keys[0].0 && k.1 == keys[0].1)
            .map(|k| k.2)
            .collect();
        (
            pick_smallest_tree(table, &chart, best, n)?,
            DecodeStatus::OpenSourceFallback(open),
        )
    } else {
        let best_score = goal_keys
            .iter()
            .map(|key| full[key].score)
            .fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<(Head, TypeId)> = goal_keys
            .into_iter()
            .filter(|key| full[key].score == best_score)
            .collect();
        (
            pick_smallest_tree(table, &chart, tied, n)?,
            DecodeStatus::ExactGoal,
        )
    };

    let score = tree_score(table, &chosen);
    Ok(DecodeResult {
        tree: chosen,
        score,
        status,
        items_built,
    })
}

/// Extracts each tied goal item and keeps the lexicographically smallest
/// tree encoding, so exact ties are reproducible.
fn pick_smallest_tree(
    table: &ScoreTable,
    chart: &Chart,
    keys: Vec<(Head, TypeId)>,
    n: usize,
) -> Result<AmDepTree, DecodeError> {
    let mut best: Option<(String, AmDepTree)> = None;
    for key in keys {
        let tree = extract(table, chart, 1, n + 1, key)?;
        let encoding = format!("{:?}|{:?}", tree.edges(), tree.root());
        match &best {
            Some((existing, _)) if *existing <= encoding => {}
            _ => best = Some((encoding, tree)),
        }
    }
    Ok(best.expect("at least one key").1)
}

fn extract(
    table: &ScoreTable,
    chart: &Chart,
    i: usize,
    k: usize,
    key: (Head, TypeId),
) -> Result<AmDepTree, DecodeError> {
    let n = table.n();
    let mut tags: Vec<Option<usize>> = vec![None; n + 1];
    let mut edges: Vec<DepEdge> = Vec::new();
    walk(chart, i, k, key, &mut tags, &mut edges);
    let supertags: Vec<Supertag> = (1..=n)
        .map(|tok| match tags[tok] {
            Some(cand_idx) => table.candidates[tok - 1][cand_idx].tag.clone(),
            None => Supertag::Bottom,
        })
        .collect();
    let root = key.0 as usize;
    Ok(AmDepTree::new(table.tokens.clone(), supertags, edges, root)?)
}

fn walk(
    chart: &Chart,
    i: usize,
    k: usize,
    key: (Head, TypeId),
    tags: &mut Vec<Option<usize>>,
    edges: &mut Vec<DepEdge>,
) {
    let item = &chart.cell(i, k)[&key];
    match &item.bp {
        Bp::Init { cand_idx } => {
            tags[key.0 as usize] = Some(*cand_idx);
        }
        Bp::Arc {
            split,
            op,
            head_left,
            left,
            right,
        } => {
            let (head, dep) = if *head_left {
                (left.0, right.0)
            } else {
                (right.0, left.0)
            };
            edges.push(DepEdge {
                head: head as usize,
                dep: dep as usize,
                op: op.clone(),
            });
            walk(chart, i, *split, *left, tags, edges);
            walk(chart, *split, k, *right, tags, edges);
        }
        Bp::SkipRight => {
            edges.push(DepEdge {
                head: key.0 as usize,
                dep: k - 1,
                op: EdgeOp::Ignore,
            });
            walk(chart, i, k - 1, key, tags, edges);
        }
        Bp::SkipLeft => {
            edges.push(DepEdge {
                head: key.0 as usize,
                dep: i,
                op: EdgeOp::Ignore,
            });
            walk(chart, i + 1, k, key, tags, edges);
        }
    }
}
