use std::collections::BTreeMap;

use super::*;
use super::penman::parse;
use crate::amtypes::{AmType, SourceName, TypeDefect};

fn src(s: &str) -> SourceName {
    SourceName::new(s).unwrap()
}

fn ty(s: &str) -> AmType {
    AmType::parse(s).unwrap()
}

pub(crate) fn g_want() -> AsGraph {
    parse_asgraph("(u<root> / want :ARG0 (v<s>) :ARG1 (w<o(s)>))").unwrap()
}

pub(crate) fn g_writer() -> AsGraph {
    parse_asgraph("(p<root> / person :ARG0-of (w / write))").unwrap()
}

pub(crate) fn g_sleep() -> AsGraph {
    parse_asgraph("(x<root> / sleep :ARG0 (y<s>))").unwrap()
}

pub(crate) fn g_sound() -> AsGraph {
    parse_asgraph("(s1<root> / sound :manner-of (s2<m>))").unwrap()
}

#[test]
fn parse_control_verb_constant() {
    let g = g_want();
    assert_eq!(g.node_count(), 3);
    assert_eq!(g.label(g.root()), Some("want"));
    assert_eq!(g.type_of(), ty("(o(s), s)"));
    // ARG1 edge points at the o-source node.
    let o_node = g.sources()[&src("o")];
    assert!(g
        .edges()
        .iter()
        .any(|e| e.from == g.root() && e.to == o_node && e.label == "ARG1"));
}

#[test]
fn parse_inverse_role_normalizes() {
    let g = g_writer();
    assert_eq!(g.type_of(), ty("()"));
    // ARG0-of from the root stores write -ARG0-> person.
    let write = g.find_labeled_node("write").unwrap();
    let person = g.find_labeled_node("person").unwrap();
    assert_eq!(person, g.root());
    assert!(g
        .edges()
        .iter()
        .any(|e| e.from == write && e.to == person && e.label == "ARG0"));
}

#[test]
fn parse_rejects_duplicate_source_name() {
    let err = parse_asgraph("(x<root> / sleep :ARG0 (y<s>) :ARG0 (z<s>))").unwrap_err();
    assert!(matches!(err, ParseError::DuplicateSource { .. }));
}

#[test]
fn parse_rejects_multiple_roots_and_missing_root() {
    assert!(matches!(
        parse_asgraph("(x<root> / a :op1 (y<root> / b))").unwrap_err(),
        ParseError::MultipleRoots { .. }
    ));
    assert!(matches!(
        parse_asgraph("(x / a)").unwrap_err(),
        ParseError::NoRoot
    ));
}

#[test]
fn parse_reports_unbound_reference() {
    assert!(matches!(
        parse_asgraph("(x<root> / a :op1 y)").unwrap_err(),
        ParseError::Unbound { .. }
    ));
}

#[test]
fn render_is_canonical_under_var_renaming() {
    let a = parse_asgraph("(u<root> / want :ARG0 (v<s>) :ARG1 (w<o(s)>))").unwrap();
    let b = parse_asgraph("(zz<root> / want :ARG1 (qq<o(s)>) :ARG0 (kk<s>))").unwrap();
    assert_eq!(render_asgraph(&a), render_asgraph(&b));
    let reparsed = parse_asgraph(&render_asgraph(&a)).unwrap();
    assert!(a.is_isomorphic(&reparsed));
}

#[test]
fn render_modifier_constant() {
    assert_eq!(
        render_asgraph(&g_sound()),
        "(s1<root> / sound :manner-of (s2<m>))"
    );
}

#[test]
fn round_trip_worked_example_constants() {
    for g in [g_want(), g_writer(), g_sleep(), g_sound()] {
        let reparsed = parse_asgraph(&render_asgraph(&g)).unwrap();
        assert!(g.is_isomorphic(&reparsed));
    }
}

#[test]
fn type_of_worked_example_constants() {
    assert_eq!(g_writer().type_of(), ty("()"));
    assert_eq!(g_sleep().type_of(), ty("(s)"));
    assert_eq!(g_want().type_of(), ty("(o(s), s)"));
    assert_eq!(g_sound().type_of(), ty("(m)"));
}

#[test]
fn apply_fills_subject_slot() {
    let g = g_sleep().apply(&src("s"), &g_writer()).unwrap();
    assert_eq!(g.type_of(), ty("()"));
    let expected = parse(
        "(x / sleep :ARG0 (p / person :ARG0-of (w / write)))",
        PenmanMode::Plain,
    )
    .unwrap();
    assert!(g.is_isomorphic(&expected));
}

#[test]
fn apply_unifies_shared_sources_into_reentrancy() {
    let vp = g_sleep().modify(&src("m"), &g_sound()).unwrap();
    let g = g_want().apply(&src("o"), &vp).unwrap();
    assert_eq!(g.type_of(), ty("(s)"));
    let expected = parse_asgraph(
        "(u<root> / want :ARG0 (v<s>) :ARG1 (x / sleep :ARG0 v :manner (s0 / sound)))",
    )
    .unwrap();
    assert!(g.is_isomorphic(&expected));
    // The unified subject node is one node: ARG0 of want and of sleep agree.
    let s_node = g.sources()[&src("s")];
    let into_s = g.edges().iter().filter(|e| e.to == s_node).count();
    assert_eq!(into_s, 2);
}

#[test]
fn apply_rejects_annotation_mismatch() {
    let err = g_want().apply(&src("o"), &g_writer()).unwrap_err();
    match err {
        OpError::Type(TypeDefect::AnnotationMismatch {
            expected, actual, ..
        }) => {
            assert_eq!(expected, ty("(s)"));
            assert_eq!(actual, ty("()"));
        }
        other => panic!("expected annotation mismatch, got {other:?}"),
    }
}

#[test]
fn apply_rejects_missing_source() {
    let err = g_writer().apply(&src("s"), &g_sound()).unwrap_err();
    assert!(matches!(err, OpError::Type(TypeDefect::MissingSource(_))));
}

#[test]
fn modify_keeps_root_and_type() {
    let g = g_sleep().modify(&src("m"), &g_sound()).unwrap();
    assert_eq!(g.type_of(), ty("(s)"));
    assert_eq!(g.label(g.root()), Some("sleep"));
    let expected =
        parse_asgraph("(x<root> / sleep :ARG0 (y<s>) :manner (s1 / sound))").unwrap();
    assert!(g.is_isomorphic(&expected));

    let g2 = g_writer().modify(&src("m"), &g_sound()).unwrap();
    assert_eq!(g2.type_of(), ty("()"));
    let expected2 = parse_asgraph(
        "(p<root> / person :ARG0-of (w / write) :manner (s1 / sound))",
    )
    .unwrap();
    assert!(g2.is_isomorphic(&expected2));
}

#[test]
fn modify_rejects_extra_modifier_source() {
    let modifier = parse_asgraph("(s1<root> / often :time-of (s2<m>) :ARG9 (s3<s>))").unwrap();
    let err = g_writer().modify(&src("m"), &modifier).unwrap_err();
    assert!(matches!(
        err,
        OpError::Type(TypeDefect::ExtraModifierSource(_))
    ));
}

#[test]
fn unification_label_conflict_is_its_own_error() {
    let head = parse_asgraph("(r<root> / f :ARG0 (a<s> / boy) :ARG1 (b<o(s)>))").unwrap();
    let arg = parse_asgraph("(q<root> / g :ARG2 (c<s> / girl))").unwrap();
    let err = head.apply(&src("o"), &arg).unwrap_err();
    assert!(matches!(err, OpError::LabelConflict { .. }));
}

#[test]
fn fusion_collapses_identical_edges_and_rejects_label_collisions() {
    // Head o-source has an outgoing edge to the shared s-source; the
    // argument's root has one too. Same label: they collapse into one.
    let head = parse_asgraph("(r<root> / f :ARG0 (x<s>) :ARG1 (y<o(s)> :bar x))").unwrap();
    let arg_same = parse_asgraph("(q<root> / g :bar (c<s>))").unwrap();
    let fused = head.apply(&src("o"), &arg_same).unwrap();
    assert_eq!(
        fused
            .edges()
            .iter()
            .filter(|e| e.label == "bar")
            .count(),
        1
    );

    // Different labels on the newly-parallel pair: collision.
    let arg_diff = parse_asgraph("(q<root> / g :baz (c<s>))").unwrap();
    let err = head.apply(&src("o"), &arg_diff).unwrap_err();
    assert!(matches!(err, OpError::DuplicateEdgeCollision { .. }));
}

#[test]
fn isomorphism_ignores_node_ids() {
    let g = g_want();
    // Rebuild with permuted ids: 0,1,2 -> 2,0,1.
    let perm = [2usize, 0, 1];
    let labels = {
        let mut l = vec![None, None, None];
        for (old, &new) in perm.iter().enumerate() {
            l[new] = g.label(old).map(str::to_string);
        }
        l
    };
    let edges = g
        .edges()
        .iter()
        .map(|e| Edge {
            from: perm[e.from],
            to: perm[e.to],
            label: e.label.clone(),
        })
        .collect();
    let sources: BTreeMap<SourceName, NodeId> = g
        .sources()
        .iter()
        .map(|(name, &id)| (name.clone(), perm[id]))
        .collect();
    let annotations = g
        .sources()
        .keys()
        .map(|name| (name.clone(), g.annotation(name)))
        .collect();
    let permuted = AsGraph::new(labels, edges, perm[g.root()], sources, annotations).unwrap();
    assert!(g.is_isomorphic(&permuted));
    assert_eq!(render_asgraph(&g), render_asgraph(&permuted));
    assert!(!g.is_isomorphic(&g_sleep()));
}

#[test]
fn constants_parse_and_round_trip() {
    let g = parse(
        "(d / dog :quant 3 :polarity - :wiki \"Rex_(dog)\")",
        PenmanMode::Plain,
    )
    .unwrap();
    assert_eq!(g.node_count(), 4);
    let rendered = render_amr(&g);
    let reparsed = parse(&rendered, PenmanMode::Plain).unwrap();
    assert!(g.is_isomorphic(&reparsed));
}

#[test]
fn reentrant_constant_gets_a_variable() {
    // A shared node keeps one identity through rendering.
    let g = parse(
        "(a / and :op1 (b / boy) :op2 b)",
        PenmanMode::Plain,
    )
    .unwrap();
    assert_eq!(g.node_count(), 2);
    let reparsed = parse(&render_amr(&g), PenmanMode::Plain).unwrap();
    assert!(g.is_isomorphic(&reparsed));
}

#[test]
fn disconnected_graph_rejected() {
    let err = AsGraph::new(
        vec![Some("a".into()), Some("b".into())],
        vec![],
        0,
        BTreeMap::new(),
        BTreeMap::new(),
    )
    .unwrap_err();
    assert!(matches!(err, GraphError::Disconnected(_)));
}

#[test]
fn source_injectivity_enforced() {
    let mut sources = BTreeMap::new();
    sources.insert(src("s"), 0usize);
    sources.insert(src("o"), 0usize);
    let err = AsGraph::new(
        vec![Some("a".into())],
        vec![],
        0,
        sources,
        BTreeMap::new(),
    )
    .unwrap_err();
    assert!(matches!(err, GraphError::SourceNotInjective { .. }));
}

#[test]
fn apply_result_type_matches_type_level() {
    use crate::amtypes::apply_type;
    let vp = g_sleep().modify(&src("m"), &g_sound()).unwrap();
    let g = g_want().apply(&src("o"), &vp).unwrap();
    let expected = apply_type(&g_want().type_of(), &src("o"), &vp.type_of()).unwrap();
    assert_eq!(g.type_of(), expected);
}
