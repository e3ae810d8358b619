use std::collections::HashMap;

use super::arena::TypeArena;
use super::*;
use crate::amdep::tests::{worked_example_gold, worked_example_tree};
use crate::amtypes::EdgeOp;
use crate::asgraph::parse_asgraph;
use crate::gen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn src(s: &str) -> crate::amtypes::SourceName {
    crate::amtypes::SourceName::new(s).unwrap()
}

/// Score table for the control-verb sentence: gold supertag per content
/// token (score 0, with bottom clearly worse), bottom free for the
/// function words, uniform edges and labels.
pub(crate) fn worked_example_table() -> ScoreTable {
    let tree = worked_example_tree();
    let n = tree.n();
    let candidates = (1..=n)
        .map(|i| {
            let mut list = Vec::new();
            let content = tree.supertag(i).graph().is_some();
            if let Some(g) = tree.supertag(i).graph() {
                list.push(Candidate {
                    tag: Supertag::Graph(g.clone()),
                    score: 0.0,
                });
            }
            list.push(Candidate {
                tag: Supertag::Bottom,
                score: if content { -2.0 } else { 0.0 },
            });
            list
        })
        .collect();
    let mut edge_scores = HashMap::new();
    for k in 1..=n {
        edge_scores.insert((0, k), 0.0);
        for i in 1..=n {
            if i != k {
                edge_scores.insert((i, k), 0.0);
            }
        }
    }
    ScoreTable {
        tokens: tree.tokens().to_vec(),
        candidates,
        edge_scores,
        label_scores: HashMap::new(),
        label_default: 0.0,
    }
}

fn content_edges(tree: &crate::amdep::AmDepTree) -> Vec<(usize, usize, String)> {
    let mut v: Vec<(usize, usize, String)> = tree
        .edges()
        .iter()
        .filter(|e| e.op != EdgeOp::Ignore)
        .map(|e| (e.head, e.dep, e.op.to_string()))
        .collect();
    v.sort();
    v
}

#[test]
fn score_table_json_round_trip() {
    let table = worked_example_table();
    let text = table.to_json();
    let back = ScoreTable::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    assert_eq!(back.n(), table.n());
    assert!(ScoreTable::from_json("{\"nope\":1}").is_err());
}

#[test]
fn projective_worked_example_uniform_scores() {
    // With fully uniform scores several goal analyses tie: the modifier
    // can attach to any value, and the whole verb phrase can modify the
    // subject instead of applying to it, yielding the same graph with a
    // different root. Invariant across the tie set: goal status, score,
    // the APP_o edge, and the evaluated graph's labeled edges.
    let table = worked_example_table();
    let result = projective_decode(&table, 1).unwrap();
    assert_eq!(result.status, DecodeStatus::ExactGoal);
    assert_eq!(result.score, 0.0);
    let edges = content_edges(&result.tree);
    assert!(edges.contains(&(3, 5, "APP_o".to_string())));
    assert!(edges.iter().any(|(_, _, op)| op.starts_with("MOD_")));
    let evaluated = result.tree.eval().unwrap();
    assert_eq!(evaluated.node_count(), 5);
    let deco = result.tree.check_well_typed().unwrap();
    assert!(deco.root_type().is_empty());
}

/// The worked-example table nudged toward the gold analysis: the
/// modifier's gold attachment and the subject's apply direction each get
/// a real edge score, making the gold tree uniquely optimal.
pub(crate) fn worked_example_table_nudged() -> ScoreTable {
    let mut table = worked_example_table();
    table.edge_scores.insert((5, 6), 1.0);
    table.edge_scores.insert((3, 2), 1.0);
    table
}

#[test]
fn projective_recovers_worked_example() {
    let table = worked_example_table_nudged();
    let result = projective_decode(&table, 1).unwrap();
    assert_eq!(result.status, DecodeStatus::ExactGoal);
    assert_eq!(
        content_edges(&result.tree),
        vec![
            (3, 2, "APP_s".to_string()),
            (3, 5, "APP_o".to_string()),
            (5, 6, "MOD_m".to_string()),
        ]
    );
    assert_eq!(result.tree.root(), 3);
    assert!(result
        .tree
        .eval()
        .unwrap()
        .is_isomorphic(&worked_example_gold()));
    assert_eq!(result.score, 2.0);
}

#[test]
fn projective_single_token() {
    let g = parse_asgraph("(p<root> / person :ARG0-of (w / write))").unwrap();
    let table = ScoreTable {
        tokens: vec![crate::amdep::Token {
            form: "writer".into(),
            pos: "NN".into(),
        }],
        candidates: vec![vec![
            Candidate {
                tag: Supertag::Graph(g),
                score: -0.5,
            },
            Candidate {
                tag: Supertag::Bottom,
                score: -9.0,
            },
        ]],
        edge_scores: HashMap::from([((0, 1), 0.0)]),
        label_scores: HashMap::new(),
        label_default: 0.0,
    };
    let result = projective_decode(&table, 1).unwrap();
    assert_eq!(result.tree.n(), 1);
    assert_eq!(result.score, -0.5);
    assert_eq!(result.status, DecodeStatus::ExactGoal);
}

#[test]
fn exact_matches_projective_on_worked_example() {
    let table = worked_example_table_nudged();
    let p = projective_decode(&table, 1).unwrap();
    let e = exact_decode(&table, EXACT_GUARD_DEFAULT).unwrap();
    assert_eq!(e.status, DecodeStatus::ExactGoal);
    assert_eq!(e.score, p.score);
    assert!(e
        .tree
        .eval()
        .unwrap()
        .is_isomorphic(&worked_example_gold()));
}

#[test]
fn exact_guard_enforced() {
    let table = worked_example_table();
    assert!(matches!(
        exact_decode(&table, 3),
        Err(DecodeError::GuardExceeded { n: 6, guard: 3 })
    ));
}

#[test]
fn fixed_tree_recovers_worked_example_with_gold_skeleton_scores() {
    let mut table = worked_example_table();
    for (edge, score) in [
        ((0usize, 3usize), 2.0),
        ((3, 2), 2.0),
        ((3, 5), 2.0),
        ((5, 6), 2.0),
        ((2, 1), 2.0),
        ((5, 4), 2.0),
    ] {
        table.edge_scores.insert(edge, score);
    }
    let result = fixed_tree_decode(&table, 1).unwrap();
    assert_eq!(result.status, DecodeStatus::ExactGoal);
    assert!(result
        .tree
        .eval()
        .unwrap()
        .is_isomorphic(&worked_example_gold()));
    // The labeled output sits on exactly the arborescence skeleton.
    let parent = fixed_tree::fixed_tree_skeleton(&table);
    for e in result.tree.edges() {
        assert_eq!(parent[e.dep], e.head);
    }
    assert_eq!(parent[result.tree.root()], 0);
}

#[test]
fn fixed_tree_retags_incompatible_child_bottom() {
    // The child's only type (s(o)) neither applies into () nor modifies,
    // so it must fall back to bottom under IGNORE.
    let head = parse_asgraph("(h<root> / alpha)").unwrap();
    let child = parse_asgraph("(x<root> / beta :ARG0 (y<s(o)>))").unwrap();
    let table = ScoreTable {
        tokens: vec![
            crate::amdep::Token {
                form: "a".into(),
                pos: "X".into(),
            },
            crate::amdep::Token {
                form: "b".into(),
                pos: "X".into(),
            },
        ],
        candidates: vec![
            vec![
                Candidate {
                    tag: Supertag::Graph(head),
                    score: 1.0,
                },
                Candidate {
                    tag: Supertag::Bottom,
                    score: -5.0,
                },
            ],
            vec![
                Candidate {
                    tag: Supertag::Graph(child),
                    score: 1.0,
                },
                Candidate {
                    tag: Supertag::Bottom,
                    score: -5.0,
                },
            ],
        ],
        edge_scores: HashMap::from([
            ((0, 1), 1.0),
            ((0, 2), 0.0),
            ((1, 2), 1.0),
            ((2, 1), 0.0),
        ]),
        label_scores: HashMap::new(),
        label_default: 0.0,
    };
    let result = fixed_tree_decode(&table, 2).unwrap();
    assert_eq!(result.status, DecodeStatus::ExactGoal);
    assert!(result.tree.supertag(2).is_bottom());
    assert_eq!(result.tree.edges()[0].op, EdgeOp::Ignore);
    // Recomputed objective: tags 1 + (-5), edge 1, label 0.
    assert_eq!(result.score, -3.0);
}

#[test]
fn type_unaware_falls_back_on_adversarial_labels() {
    // Transitive verb between two nominals, but APP_s outscores
    // everything on every edge: the second APP_s cannot type.
    let verb = parse_asgraph("(v<root> / chase :ARG0 (x<s>) :ARG1 (y<o>))").unwrap();
    let noun1 = parse_asgraph("(b<root> / boy)").unwrap();
    let noun2 = parse_asgraph("(d<root> / dog)").unwrap();
    let mk = |g: crate::asgraph::AsGraph| {
        vec![
            Candidate {
                tag: Supertag::Graph(g),
                score: 1.0,
            },
            Candidate {
                tag: Supertag::Bottom,
                score: -5.0,
            },
        ]
    };
    let mut edge_scores = HashMap::new();
    for k in 1..=3usize {
        edge_scores.insert((0, k), if k == 2 { 2.0 } else { 0.0 });
        for i in 1..=3usize {
            if i != k {
                edge_scores.insert((i, k), if i == 2 { 1.0 } else { 0.0 });
            }
        }
    }
    let mut label_scores = HashMap::new();
    for i in 0..=3usize {
        for k in 1..=3usize {
            if i != k {
                label_scores.insert((i, k, EdgeOp::Apply(src("s"))), 5.0);
                label_scores.insert((i, k, EdgeOp::Apply(src("o"))), 1.0);
            }
        }
    }
    let table = ScoreTable {
        tokens: (1..=3)
            .map(|i| crate::amdep::Token {
                form: format!("w{i}"),
                pos: "X".into(),
            })
            .collect(),
        candidates: vec![mk(noun1), mk(verb), mk(noun2)],
        edge_scores,
        label_scores,
        label_default: -2.0,
    };
    let result = type_unaware_decode(&table).unwrap();
    assert_eq!(result.status, DecodeStatus::SubtreeFallback);
    assert!(result.tree.check_well_typed().is_some());
    // The type-aware decoder on the same instance has no trouble.
    let ft = fixed_tree_decode(&table, 1).unwrap();
    assert_eq!(ft.status, DecodeStatus::ExactGoal);
    assert!(ft.score >= result.score);
}

#[test]
fn type_unaware_single_token_is_well_typed() {
    let g = parse_asgraph("(b<root> / boy)").unwrap();
    let table = ScoreTable {
        tokens: vec![crate::amdep::Token {
            form: "boy".into(),
            pos: "NN".into(),
        }],
        candidates: vec![vec![
            Candidate {
                tag: Supertag::Graph(g),
                score: 1.0,
            },
            Candidate {
                tag: Supertag::Bottom,
                score: -5.0,
            },
        ]],
        edge_scores: HashMap::from([((0, 1), 0.0)]),
        label_scores: HashMap::new(),
        label_default: 0.0,
    };
    let result = type_unaware_decode(&table).unwrap();
    assert_eq!(result.status, DecodeStatus::ExactGoal);
}

#[test]
fn hamiltonian_reduction_examples() {
    // Path 1 -> 2 -> 3 exists and ends at 3.
    let table = build_hamiltonian_instance(3, &[(1, 2), (2, 3)]).unwrap();
    let result = exact_decode(&table, EXACT_GUARD_DEFAULT).unwrap();
    assert_eq!(result.score, 2.0);
    assert!(hamiltonian_verdict(3, &result));
    assert!(has_path_ending_at_last(3, &[(1, 2), (2, 3)]));

    // Two nodes, only the wrong-direction edge.
    let table = build_hamiltonian_instance(2, &[(2, 1)]).unwrap();
    let result = exact_decode(&table, EXACT_GUARD_DEFAULT).unwrap();
    assert!(result.score < 1.0);
    assert!(!hamiltonian_verdict(2, &result));
    assert!(!has_path_ending_at_last(2, &[(2, 1)]));

    assert!(matches!(
        build_hamiltonian_instance(1, &[]),
        Err(DecodeError::TooSmall(1))
    ));
}

#[test]
fn hamiltonian_sweep_n3() {
    // All 64 digraphs on 3 nodes.
    let pairs: Vec<(usize, usize)> = (1..=3)
        .flat_map(|i| (1..=3).filter(move |&k| k != i).map(move |k| (i, k)))
        .collect();
    for mask in 0..(1u32 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &e)| e)
            .collect();
        let table = build_hamiltonian_instance(3, &edges).unwrap();
        let result = exact_decode(&table, EXACT_GUARD_DEFAULT).unwrap();
        assert_eq!(
            hamiltonian_verdict(3, &result),
            has_path_ending_at_last(3, &edges),
            "digraph {edges:?}"
        );
        if hamiltonian_verdict(3, &result) {
            assert_eq!(result.score, 2.0);
        }
    }
}

#[test]
fn oracle_agreement_smoke() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut projective_hits = 0;
    for trial in 0..60 {
        let n = 2 + (trial % 4);
        let table = gen::random_table(&mut rng, n, 2);
        let exact = exact_decode(&table, EXACT_GUARD_DEFAULT).unwrap();
        let proj = projective_decode(&table, 3).unwrap();
        assert!(
            proj.score <= exact.score,
            "projective beat exact: {} > {}",
            proj.score,
            exact.score
        );
        if exact.status == DecodeStatus::ExactGoal
            && proj.status == DecodeStatus::ExactGoal
            && gen::is_projective(&exact.tree)
        {
            assert_eq!(proj.score, exact.score, "trial {trial}");
            projective_hits += 1;
        }
        // Every decoder output is well-typed.
        assert!(exact.tree.check_well_typed().is_some());
        assert!(proj.tree.check_well_typed().is_some());
        // Reported scores are the recomputed objective.
        assert_eq!(proj.score, tree_score(&table, &proj.tree));
        assert_eq!(exact.score, tree_score(&table, &exact.tree));
    }
    assert!(projective_hits > 10, "only {projective_hits} comparable trials");
}

#[test]
fn k_monotonicity_smoke() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..40 {
        let n = 2 + (trial % 3);
        let table = gen::random_table(&mut rng, n, 3);
        let lo = projective_decode(&table, 1).unwrap();
        let hi = projective_decode(&table, 2).unwrap();
        if lo.status == DecodeStatus::ExactGoal {
            assert_eq!(hi.status, DecodeStatus::ExactGoal);
            assert!(hi.score >= lo.score, "k=2 got {} < {}", hi.score, lo.score);
        }
    }
}

#[test]
fn reruns_are_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let table = gen::random_table(&mut rng, 5, 3);
    let a = projective_decode(&table, 2).unwrap();
    let b = projective_decode(&table, 2).unwrap();
    assert_eq!(a.tree, b.tree);
    assert_eq!(a.score, b.score);
    let fa = fixed_tree_decode(&table, 2).unwrap();
    let fb = fixed_tree_decode(&table, 2).unwrap();
    assert_eq!(fa.tree, fb.tree);
}

#[test]
fn skeleton_dp_scores_gold_skeleton() {
    let table = worked_example_table_nudged();
    let mut arena = TypeArena::new();
    let cands = fixed_tree::candidate_lists(&table, 1, &mut arena);
    let parent = vec![0usize, 2, 3, 0, 5, 3, 5];
    let mut scratch = fixed_tree::DpScratch::default();
    let mut items = 0;
    let root = fixed_tree::skeleton_scores(&table, &parent, &cands, &mut arena, &mut scratch, &mut items);
    assert_eq!(root, 3);
    let finals = &scratch.finals[root - 1];
    let empty = arena.empty;
    let goal = finals.iter().find(|&&(tid, _)| tid == empty);
    assert_eq!(goal.map(|&(_, s)| s), Some(2.0), "finals: {finals:?}");
}
