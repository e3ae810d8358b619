use super::*;
use crate::amdep::Token;
use crate::amtypes::AmType;
use crate::asgraph::parse_asgraph;

fn toks(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .map(|f| Token {
            form: f.to_string(),
            pos: "_".to_string(),
        })
        .collect()
}

fn entry(snt: &str, pos: &str, graph: &str) -> CorpusEntry {
    CorpusEntry {
        tokens: snt.split_whitespace().map(str::to_string).collect(),
        pos: pos.split_whitespace().map(str::to_string).collect(),
        amr: parse_amr(graph).unwrap(),
    }
}

fn convert_one(e: &CorpusEntry) -> Result<Decomposed, Reject> {
    let tokens: Vec<Token> = e
        .tokens
        .iter()
        .zip(&e.pos)
        .map(|(form, pos)| Token {
            form: form.clone(),
            pos: pos.clone(),
        })
        .collect();
    let pre = preprocess(&tokens, Some(&e.amr), &[]);
    let amr = pre.amr.unwrap();
    let alignment = align(&amr, &pre.tokens, &AlignConfig::default());
    decompose(&amr, &alignment, &pre.tokens, &BlobPolicy::default())
}

#[test]
fn amr_round_trip_and_reentrancy() {
    let g = parse_amr(
        "(w / want :ARG0 (p / person :ARG0-of (wr / write)) \
         :ARG1 (s / sleep :ARG0 p :manner (so / sound)))",
    )
    .unwrap();
    let text = render_amr(&g);
    let back = parse_amr(&text).unwrap();
    assert!(g.is_isomorphic(&back));
    assert!(parse_amr("(a / and :op1 (b / boy))").is_ok());
    assert!(parse_amr("(a / and :op1 x)").is_err());
}

#[test]
fn corpus_format_round_trip() {
    let text = "# ::snt the boy sleeps\n# ::pos DT NN VBZ\n(s / sleep :ARG0 (b / boy))\n\n\
                # ::snt she sleeps\n(s / sleep :ARG0 (sh / she))\n";
    let entries = read_corpus(text).unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0].tokens, vec!["the", "boy", "sleeps"]);
    assert_eq!(entries[1].pos, vec!["_", "_"]);
    let back = read_corpus(&write_corpus(&entries)).unwrap();
    assert_eq!(back, entries);
    assert!(read_corpus("(g / graph)\n").is_err());
}

#[test]
fn decompose_control_verb_sentence() {
    let e = entry(
        "the writer wants to sleep soundly",
        "DT NN VBZ TO VB RB",
        "(w / want :ARG0 (p / person :ARG0-of (wr / write)) \
         :ARG1 (s / sleep :ARG0 p :manner (so / sound)))",
    );
    let d = convert_one(&e).unwrap();
    let tree = &d.tree;
    assert_eq!(tree.root(), 3);
    // The four constants of the worked example, with the control-verb
    // annotation inferred on the object slot.
    let want = tree.supertag(3).graph().unwrap();
    assert_eq!(want.type_of(), AmType::parse("(o(s), s)").unwrap());
    let writer = tree.supertag(2).graph().unwrap();
    assert_eq!(writer.type_of(), AmType::parse("()").unwrap());
    assert!(writer.find_labeled_node("person").is_some());
    let sleep = tree.supertag(5).graph().unwrap();
    assert_eq!(sleep.type_of(), AmType::parse("(s)").unwrap());
    let sound = tree.supertag(6).graph().unwrap();
    assert_eq!(sound.type_of(), AmType::parse("(m)").unwrap());
    assert!(tree.supertag(1).is_bottom());
    assert!(tree.supertag(4).is_bottom());
    // Evaluation reproduces the input.
    let evaluated = tree.eval().unwrap();
    assert!(evaluated.is_isomorphic(&e.amr));
    assert_eq!(d.removed_reentrancies, 0);
}

#[test]
fn decompose_unaccusative_subject() {
    let e = entry("the window breaks", "DT NN VBZ", "(b / break :ARG1 (w / window))");
    let d = convert_one(&e).unwrap();
    let broke = d.tree.supertag(3).graph().unwrap();
    // ARG1 with no ARG0 promotes to the subject source.
    assert_eq!(broke.type_of(), AmType::parse("(s)").unwrap());
}

#[test]
fn decompose_object_promotion() {
    let e = entry(
        "the boy replied to the girl",
        "DT NN VBD TO DT NN",
        "(r / reply :ARG0 (b / boy) :ARG2 (g / girl))",
    );
    let d = convert_one(&e).unwrap();
    let reply = d.tree.supertag(3).graph().unwrap();
    // ARG2 with no ARG1 promotes down to o.
    assert_eq!(reply.type_of(), AmType::parse("(o, s)").unwrap());
}

#[test]
fn decompose_shared_subject_coordination() {
    let e = entry(
        "the boy runs and swims",
        "DT NN VBZ CC VBZ",
        "(a / and :op1 (r / run :ARG0 (b / boy)) :op2 (s / swim :ARG0 b))",
    );
    let d = convert_one(&e).unwrap();
    let tree = &d.tree;
    assert_eq!(tree.root(), 4);
    // The shared subject attaches at the coordination node.
    let boy_edge = tree.incoming(2).unwrap();
    assert_eq!(boy_edge.head, 4);
    assert_eq!(boy_edge.op.to_string(), "APP_s");
    let and = tree.supertag(4).graph().unwrap();
    assert_eq!(and.type_of(), AmType::parse("(op1(s), op2(s))").unwrap());
    assert!(tree.eval().unwrap().is_isomorphic(&e.amr));
    assert_eq!(d.removed_reentrancies, 0);
}

#[test]
fn decompose_rejects_unresolvable_coreference() {
    // A reentrancy whose two mentions get different source names: the
    // oblique one is deleted, and the round trip then cannot match.
    let e = entry(
        "the boy sees the dog chasing the boy",
        "DT NN VBZ DT NN VBG DT NN",
        "(s / see :ARG0 (b / boy) :ARG1 (c / chase :ARG0 (d / dog) :ARG1 b))",
    );
    match convert_one(&e) {
        Err(_) => {}
        Ok(d) => {
            // If it converts, it must be because the reentrancy was
            // removed and the evaluation matches the reduced graph.
            assert!(d.removed_reentrancies > 0);
        }
    }
}

#[test]
fn preprocess_name_number_and_wiki() {
    let e = entry(
        "Agatha Christie wrote 66 novels",
        "NNP NNP VBD CD NNS",
        "(w / write :ARG0 (p / person :wiki \"Agatha_Christie\" \
         :name (n / name :op1 \"Agatha\" :op2 \"Christie\")) \
         :ARG1 (b / book :quant 66))",
    );
    let tokens: Vec<Token> = e
        .tokens
        .iter()
        .zip(&e.pos)
        .map(|(form, pos)| Token {
            form: form.clone(),
            pos: pos.clone(),
        })
        .collect();
    let pre = preprocess(&tokens, Some(&e.amr), &[]);
    let forms: Vec<&str> = pre.tokens.iter().map(|t| t.form.as_str()).collect();
    assert_eq!(forms, vec!["NAME", "wrote", "NUMBER", "novels"]);
    assert_eq!(pre.wiki_removed, 1);
    assert_eq!(pre.records.len(), 2);
    let amr = pre.amr.clone().unwrap();
    assert!(amr.find_labeled_node("NAME").is_some());
    assert!(amr.find_labeled_node("NUMBER").is_some());
    assert!(amr.find_labeled_node("\"Agatha\"").is_none());

    // The inverse restores names, wiki and the number.
    let restored = postprocess(&amr, &pre.records);
    assert!(restored.is_isomorphic(&e.amr));

    // Identity on sentences without patterns.
    let plain = entry("the boy sleeps", "DT NN VBZ", "(s / sleep :ARG0 (b / boy))");
    let plain_tokens: Vec<Token> = plain
        .tokens
        .iter()
        .map(|f| Token {
            form: f.clone(),
            pos: "_".into(),
        })
        .collect();
    let pre2 = preprocess(&plain_tokens, Some(&plain.amr), &[]);
    assert_eq!(pre2.tokens.len(), 3);
    assert!(pre2.records.is_empty());
    assert!(pre2.amr.unwrap().is_isomorphic(&plain.amr));
}

#[test]
fn parse_time_patterns() {
    let pre = preprocess(&toks("Rome fell in 476"), None, &[]);
    let forms: Vec<&str> = pre.tokens.iter().map(|t| t.form.as_str()).collect();
    assert_eq!(forms, vec!["NAME", "fell", "in", "NUMBER"]);
    let pre = preprocess(&toks("it happened on 2017-01-05"), None, &[]);
    assert!(pre.tokens.iter().any(|t| t.form == "DATE"));
}

#[test]
fn convert_corpus_end_to_end_roundtrip() {
    let entries = vec![
        entry(
            "the writer wants to sleep soundly",
            "DT NN VBZ TO VB RB",
            "(w / want :ARG0 (p / person :ARG0-of (wr / write)) \
             :ARG1 (s / sleep :ARG0 p :manner (so / sound)))",
        ),
        entry("the boy sleeps", "DT NN VBZ", "(s / sleep :ARG0 (b / boy))"),
        entry(
            "a cat chased the dog",
            "DT NN VBD DT NN",
            "(c / chase :ARG0 (ca / cat) :ARG1 (d / dog))",
        ),
    ];
    let outcome = convert_corpus(&entries, &ConvertConfig::default());
    assert_eq!(outcome.stats.converted, 3);
    assert_eq!(outcome.stats.rejected, 0);
    // Round trip through the delexicalized treebank text.
    let text = crate::amdep::treebank::write_treebank(&outcome.treebank);
    let back = crate::amdep::treebank::read_treebank(&text).unwrap();
    assert_eq!(back, outcome.treebank);
    // Relexicalize via the trained scorer and compare to the gold graphs.
    let scorer = train_count_scorer(&outcome.treebank, 0.1)
        .with_name_spans(outcome.name_spans.clone());
    for (entry_idx, sentence) in outcome.sentences.iter().enumerate() {
        let tree = &outcome.treebank.entries[entry_idx].tree;
        let realized = scorer.realize(tree, &sentence.records).unwrap();
        assert!(
            realized.is_isomorphic(&entries[sentence.corpus_index].amr),
            "sentence {entry_idx} did not round-trip"
        );
    }
    let stats_text = outcome.stats.to_string();
    for field in [
        "rejected_fraction=",
        "nonprojective_fraction=",
        "supertags_delexicalized=",
        "reentrancies_removed=",
    ] {
        assert!(stats_text.contains(field), "missing {field}");
    }
}

#[test]
fn scorer_prefers_observed_tags_and_includes_bottom() {
    let entries = vec![
        entry("the boy sleeps", "DT NN VBZ", "(s / sleep :ARG0 (b / boy))"),
        entry("the girl sleeps", "DT NN VBZ", "(s / sleep :ARG0 (g / girl))"),
    ];
    let outcome = convert_corpus(&entries, &ConvertConfig::default());
    let scorer = train_count_scorer(&outcome.treebank, 0.1);
    let (tokens, table, _) = scorer.analyze(&[
        "the".to_string(),
        "boy".to_string(),
        "sleeps".to_string(),
    ]);
    assert_eq!(tokens[2].pos, "VBZ");
    table.validate().unwrap();
    // "the" prefers bottom; "sleeps" prefers its intransitive tag.
    let the_best = table.candidates[0]
        .iter()
        .max_by(|a, b| a.score.partial_cmp(&b.score).unwrap())
        .unwrap();
    assert!(the_best.tag.is_bottom());
    let sleeps_best = table.candidates[2]
        .iter()
        .max_by(|a, b| a.score.partial_cmp(&b.score).unwrap())
        .unwrap();
    assert_eq!(
        sleeps_best.tag.graph().unwrap().type_of(),
        AmType::parse("(s)").unwrap()
    );
    // Unseen words still get a nonempty candidate set with bottom.
    let (_, unseen, _) = scorer.analyze(&["zorble".to_string()]);
    unseen.validate().unwrap();
    assert!(unseen.candidates[0].len() > 1);
}

#[test]
fn smatch_examples() {
    let g1 = parse_amr("(w / want :ARG0 (b / boy))").unwrap();
    assert_eq!(smatch(&g1, &g1, 4, 7).f, 1.0);
    let g2 = parse_amr("(w / want :ARG1 (b / boy))").unwrap();
    let score = smatch(&g1, &g2, 4, 7);
    assert!((score.f - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(score.precision, score.recall);
    let oracle = smatch_exhaustive(&g1, &g2);
    assert_eq!(score.f, oracle.f);
}

#[test]
fn smatch_matches_exhaustive_on_small_pairs() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
    for trial in 0..60 {
        let a = crate::gen::random_asgraph(&mut rng).strip_sources();
        let b = crate::gen::random_asgraph(&mut rng).strip_sources();
        let fast = smatch(&a, &b, 8, trial as u64);
        let slow = smatch_exhaustive(&a, &b);
        assert!(
            fast.f <= slow.f + 1e-12,
            "hill climbing exceeded the oracle"
        );
        assert_eq!(fast.f, slow.f, "trial {trial}: {a} vs {b}");
    }
}

#[test]
fn smatch_is_deterministic_under_seed() {
    let g1 = parse_amr("(a / alpha :op1 (b / beta) :op2 (c / beta :mod (d / delta)))").unwrap();
    let g2 = parse_amr("(a / alpha :op1 (b / beta :mod (d / delta)) :op2 (c / beta))").unwrap();
    let x = smatch(&g1, &g2, 6, 99);
    let y = smatch(&g1, &g2, 6, 99);
    assert_eq!(x, y);
}
