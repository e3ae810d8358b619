use super::treebank::{read_treebank, write_treebank, Treebank, TreebankEntry, TreebankError};
use super::*;
use crate::amtypes::SourceName;
use crate::asgraph::tests::{g_sleep, g_sound, g_want, g_writer};
use crate::asgraph::{parse_penman, PenmanMode};

fn src(s: &str) -> SourceName {
    SourceName::new(s).unwrap()
}

fn ty(s: &str) -> AmType {
    AmType::parse(s).unwrap()
}

fn tok(form: &str, pos: &str) -> Token {
    Token {
        form: form.into(),
        pos: pos.into(),
    }
}

fn edge(head: usize, dep: usize, op: &str) -> DepEdge {
    DepEdge {
        head,
        dep,
        op: EdgeOp::parse(op).unwrap(),
    }
}

/// The six-token control-verb sentence with its gold supertags.
pub(crate) fn worked_example_tree() -> AmDepTree {
    let tokens = vec![
        tok("the", "DT"),
        tok("writer", "NN"),
        tok("wants", "VBZ"),
        tok("to", "TO"),
        tok("sleep", "VB"),
        tok("soundly", "RB"),
    ];
    let supertags = vec![
        Supertag::Bottom,
        Supertag::Graph(g_writer()),
        Supertag::Graph(g_want()),
        Supertag::Bottom,
        Supertag::Graph(g_sleep()),
        Supertag::Graph(g_sound()),
    ];
    let edges = vec![
        edge(3, 2, "APP_s"),
        edge(3, 5, "APP_o"),
        edge(5, 6, "MOD_m"),
        edge(2, 1, "IGNORE"),
        edge(5, 4, "IGNORE"),
    ];
    AmDepTree::new(tokens, supertags, edges, 3).unwrap()
}

pub(crate) fn worked_example_gold() -> AsGraph {
    parse_penman(
        "(w / want :ARG0 (p / person :ARG0-of (wr / write)) \
         :ARG1 (sl / sleep :ARG0 p :manner (so / sound)))",
        PenmanMode::Plain,
    )
    .unwrap()
}

#[test]
fn worked_example_checks_with_empty_root_type() {
    let tree = worked_example_tree();
    let deco = tree.check_well_typed().expect("well-typed");
    assert_eq!(deco.root_type(), &ty("()"));
    assert_eq!(deco.type_at(5), &ty("(s)"));
    assert_eq!(deco.type_at(1), &AmType::Bottom);
}

#[test]
fn wrong_edge_label_is_undefined_not_structural() {
    let tree = worked_example_tree();
    let mut edges: Vec<DepEdge> = tree.edges().to_vec();
    for e in edges.iter_mut() {
        if e.dep == 5 {
            e.op = EdgeOp::parse("APP_s").unwrap();
        }
    }
    let bad = AmDepTree::new(
        tree.tokens().to_vec(),
        (1..=tree.n()).map(|i| tree.supertag(i).clone()).collect(),
        edges,
        tree.root(),
    )
    .unwrap();
    assert!(bad.check_well_typed().is_none());
}

#[test]
fn ignore_into_content_token_is_structural() {
    let err = AmDepTree::new(
        vec![tok("a", "X"), tok("b", "X")],
        vec![
            Supertag::Graph(g_writer()),
            Supertag::Graph(g_writer()),
        ],
        vec![edge(1, 2, "IGNORE")],
        1,
    )
    .unwrap_err();
    assert_eq!(err, TreeError::IgnoreIntoContent(2));
}

#[test]
fn apply_into_bottom_token_is_structural() {
    let err = AmDepTree::new(
        vec![tok("a", "X"), tok("b", "X")],
        vec![Supertag::Graph(g_sleep()), Supertag::Bottom],
        vec![edge(1, 2, "APP_s")],
        1,
    )
    .unwrap_err();
    assert!(matches!(err, TreeError::OpIntoBottom { .. }));
}

#[test]
fn canonical_term_applies_outermost_lowest_index() {
    let term = worked_example_tree().term().unwrap();
    assert_eq!(
        term.to_string(),
        "APP_s[3,2](APP_o[3,5](want[3], MOD_m[5,6](sleep[5], sound[6])), person[2])"
    );
    assert_eq!(term.head_index(), 3);
}

#[test]
fn single_token_and_ignore_only_trees_are_constants() {
    let single = AmDepTree::new(
        vec![tok("writer", "NN")],
        vec![Supertag::Graph(g_writer())],
        vec![],
        1,
    )
    .unwrap();
    assert!(matches!(
        single.term().unwrap(),
        AmTerm::Const { index: 1, .. }
    ));

    let with_ignores = AmDepTree::new(
        vec![tok("the", "DT"), tok("writer", "NN")],
        vec![Supertag::Bottom, Supertag::Graph(g_writer())],
        vec![edge(2, 1, "IGNORE")],
        2,
    )
    .unwrap();
    let term = with_ignores.term().unwrap();
    assert!(matches!(term, AmTerm::Const { index: 2, .. }));
    // The ignored token contributes no nodes.
    assert_eq!(with_ignores.eval().unwrap().node_count(), 2);
}

#[test]
fn eval_reproduces_gold_graph() {
    let tree = worked_example_tree();
    let result = tree.eval().unwrap();
    assert_eq!(result.node_count(), 5);
    assert!(result.is_isomorphic(&worked_example_gold()));
}

#[test]
fn alternative_valid_order_evaluates_isomorphically() {
    // Independent argument slots commute: filling subject before object
    // gives the same graph as object before subject.
    let chase =
        parse_penman("(c<root> / chase :ARG0 (x<s>) :ARG1 (y<o>))", PenmanMode::Extended)
            .unwrap();
    let boy = parse_penman("(b<root> / boy)", PenmanMode::Extended).unwrap();
    let dog = parse_penman("(d<root> / dog)", PenmanMode::Extended).unwrap();
    let s_first = chase
        .apply(&src("s"), &boy)
        .unwrap()
        .apply(&src("o"), &dog)
        .unwrap();
    let o_first = chase
        .apply(&src("o"), &dog)
        .unwrap()
        .apply(&src("s"), &boy)
        .unwrap();
    assert!(s_first.is_isomorphic(&o_first));
}

#[test]
fn racing_orders_differ_only_through_final_types() {
    // At a control verb, filling the subject before the object argument
    // arrives skips the unification: each step is defined but the result
    // type differs from the canonical order's, which is how such orders
    // are told apart.
    let vp = g_sleep().modify(&src("m"), &g_sound()).unwrap();
    let alt = g_want()
        .apply(&src("s"), &g_writer())
        .unwrap()
        .apply(&src("o"), &vp)
        .unwrap();
    assert_eq!(alt.type_of(), ty("(s)"));
    let canonical = worked_example_tree();
    assert_eq!(canonical.check_well_typed().unwrap().root_type(), &ty("()"));
    assert!(!alt.is_isomorphic(&canonical.eval().unwrap()));
}

#[test]
fn order_search_handles_sources_supplied_by_siblings() {
    // A raising-style head: its own type is (o(s)); the subject source
    // only exists after the o argument contributes it. The canonical
    // order fails, the subset walk finds o-before-s.
    let seem = parse_penman("(r<root> / seem :ARG1 (x<o(s)>))", PenmanMode::Extended).unwrap();
    let boy = parse_penman("(b<root> / boy)", PenmanMode::Extended).unwrap();
    let tree = AmDepTree::new(
        vec![tok("seems", "VBZ"), tok("sleep", "VB"), tok("boy", "NN")],
        vec![
            Supertag::Graph(seem),
            Supertag::Graph(g_sleep()),
            Supertag::Graph(boy),
        ],
        vec![edge(1, 2, "APP_o"), edge(1, 3, "APP_s")],
        1,
    )
    .unwrap();
    let deco = tree.check_well_typed().expect("well-typed via o-first order");
    assert_eq!(deco.root_type(), &ty("()"));
    let expected = parse_penman(
        "(r / seem :ARG1 (sl / sleep :ARG0 (b / boy)))",
        PenmanMode::Plain,
    )
    .unwrap();
    assert!(tree.eval().unwrap().is_isomorphic(&expected));
}

#[test]
fn well_typedness_ignores_token_forms() {
    let tree = worked_example_tree();
    let relabeled = AmDepTree::new(
        (0..tree.n()).map(|i| tok(&format!("w{i}"), "X")).collect(),
        (1..=tree.n()).map(|i| tree.supertag(i).clone()).collect(),
        tree.edges().to_vec(),
        tree.root(),
    )
    .unwrap();
    assert_eq!(
        tree.check_well_typed().unwrap().root_type(),
        relabeled.check_well_typed().unwrap().root_type()
    );
}

#[test]
fn treebank_round_trip() {
    let single = AmDepTree::new(
        vec![tok("writer", "NN")],
        vec![Supertag::Graph(g_writer())],
        vec![],
        1,
    )
    .unwrap();
    let tb = Treebank {
        entries: vec![
            TreebankEntry {
                tree: worked_example_tree(),
                lex_labels: vec![
                    None,
                    Some("write".into()),
                    Some("want".into()),
                    None,
                    Some("sleep".into()),
                    Some("sound".into()),
                ],
            },
            TreebankEntry {
                tree: single,
                lex_labels: vec![Some("write".into())],
            },
        ],
    };
    let text = write_treebank(&tb);
    let back = read_treebank(&text).unwrap();
    assert_eq!(back, tb);
    // Canonical output is stable.
    assert_eq!(write_treebank(&back), text);
}

#[test]
fn treebank_rejects_malformed_rows() {
    assert!(read_treebank("").unwrap().entries.is_empty());

    let dangling = "1\tboy\tNN\t(b<root> / boy)\t_\t7\tAPP_s\n";
    assert!(matches!(
        read_treebank(dangling).unwrap_err(),
        TreebankError::DanglingHead { head: 7, .. }
    ));

    let arity = "1\tboy\tNN\t(b<root> / boy)\t_\t0\n";
    assert!(matches!(
        read_treebank(arity).unwrap_err(),
        TreebankError::Arity { .. }
    ));

    let bad_label = "1\tboy\tNN\t(b<root> / boy)\t_\t0\tROOT\n\
                     2\tx\tX\t_|_\t_\t1\tWEIRD\n";
    assert!(matches!(
        read_treebank(bad_label).unwrap_err(),
        TreebankError::Field { what: "edge label", .. }
    ));
}
