//! A count-based scorer over converted treebanks: smoothed conditional
//! counts stand in for the neural models that would produce score tables
//! at scale. Everything is log-domain and add-lambda smoothed, and the
//! bottom supertag is always among a token's candidates.

use crate::amdep::treebank::Treebank;
use crate::amdep::{Supertag, Token, BOTTOM_TEXT};
use crate::amtypes::EdgeOp;
use crate::asgraph::{parse_asgraph, render_asgraph};
use crate::decode::{Candidate, ScoreTable};
use crate::util::DetMap;

use super::lexicon::LabelLookup;
use super::preprocess::{postprocess, preprocess, PreRecord};

fn bucket(head: usize, dep: usize) -> i8 {
    let d = dep as i64 - head as i64;
    d.clamp(-4, 4) as i8
}

type Signature = (String, String, i8);

#[derive(Clone, Debug)]
pub struct CountScorer {
    lambda: f64,
    /// form -> rendered delexicalized supertag (or `_|_`) -> count.
    tag_counts: DetMap<String, DetMap<String, usize>>,
    tag_global: DetMap<String, usize>,
    tag_vocab: Vec<String>,
    tag_total: usize,
    labels: LabelLookup,
    /// (pos_head, pos_dep, distance bucket) -> (edges, pairs).
    edge_counts: DetMap<Signature, (usize, usize)>,
    /// pos -> (times root, tokens).
    root_counts: DetMap<String, (usize, usize)>,
    /// (pos_head, pos_dep, direction sign) -> op -> count.
    op_counts: DetMap<(String, String, i8), DetMap<String, usize>>,
    op_vocab: Vec<EdgeOp>,
    pos_by_form: DetMap<String, DetMap<String, usize>>,
    /// Name spans seen in training, with their wiki entries.
    pub name_spans: Vec<(Vec<String>, Option<String>)>,
}

pub fn train_count_scorer(tb: &Treebank, lambda: f64) -> CountScorer {
    let mut s = CountScorer {
        lambda,
        tag_counts: DetMap::default(),
        tag_global: DetMap::default(),
        tag_vocab: Vec::new(),
        tag_total: 0,
        labels: LabelLookup::default(),
        edge_counts: DetMap::default(),
        root_counts: DetMap::default(),
        op_counts: DetMap::default(),
        op_vocab: vec![EdgeOp::Ignore],
        pos_by_form: DetMap::default(),
        name_spans: Vec::new(),
    };
    for entry in &tb.entries {
        let tree = &entry.tree;
        let n = tree.n();
        for i in 1..=n {
            let token = tree.token(i);
            let rendered = match tree.supertag(i) {
                Supertag::Graph(g) => render_asgraph(g),
                Supertag::Bottom => BOTTOM_TEXT.to_string(),
            };
            *s.tag_counts
                .entry(token.form.clone())
                .or_default()
                .entry(rendered.clone())
                .or_default() += 1;
            *s.tag_global.entry(rendered).or_default() += 1;
            s.tag_total += 1;
            if let Some(label) = &entry.lex_labels[i - 1] {
                s.labels.observe(&token.form, label);
            }
            *s.pos_by_form
                .entry(token.form.clone())
                .or_default()
                .entry(token.pos.clone())
                .or_default() += 1;
            let rc = s.root_counts.entry(token.pos.clone()).or_default();
            rc.1 += 1;
            if i == tree.root() {
                rc.0 += 1;
            }
        }
        for i in 1..=n {
            for k in 1..=n {
                if i == k {
                    continue;
                }
                let sig = (
                    tree.token(i).pos.clone(),
                    tree.token(k).pos.clone(),
                    bucket(i, k),
                );
                s.edge_counts.entry(sig).or_default().1 += 1;
            }
        }
        for e in tree.edges() {
            let sig = (
                tree.token(e.head).pos.clone(),
                tree.token(e.dep).pos.clone(),
                bucket(e.head, e.dep),
            );
            s.edge_counts.entry(sig.clone()).or_default().0 += 1;
            let dir = if e.dep > e.head { 1i8 } else { -1 };
            *s.op_counts
                .entry((sig.0, sig.1, dir))
                .or_default()
                .entry(e.op.to_string())
                .or_default() += 1;
            if !s.op_vocab.contains(&e.op) {
                s.op_vocab.push(e.op.clone());
            }
        }
    }
    let mut vocab: Vec<String> = s.tag_global.keys().cloned().collect();
    vocab.sort_by(|a, b| {
        s.tag_global[b]
            .cmp(&s.tag_global[a])
            .then_with(|| a.cmp(b))
    });
    s.tag_vocab = vocab;
    s.op_vocab.sort();
    s
}

impl CountScorer {
    pub fn with_name_spans(mut self, spans: Vec<(Vec<String>, Option<String>)>) -> Self {
        self.name_spans = spans;
        self
    }

    pub fn guess_pos(&self, form: &str) -> String {
        self.pos_by_form
            .get(form)
            .and_then(|m| {
                let mut items: Vec<(&String, &usize)> = m.iter().collect();
                items.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
                items.first().map(|(p, _)| (*p).clone())
            })
            .unwrap_or_else(|| "_".to_string())
    }

    fn tag_score(&self, form: &str, rendered: &str) -> f64 {
        let v = self.tag_vocab.len().max(1) as f64;
        match self.tag_counts.get(form) {
            Some(counts) => {
                let total: usize = counts.values().sum();
                let c = counts.get(rendered).copied().unwrap_or(0) as f64;
                ((c + self.lambda) / (total as f64 + self.lambda * v)).ln()
            }
            None => {
                let c = self.tag_global.get(rendered).copied().unwrap_or(0) as f64;
                ((c + self.lambda) / (self.tag_total as f64 + self.lambda * v)).ln()
            }
        }
    }

    /// The factored score table for a (preprocessed) token sequence.
    /// Candidate supertags stay delexicalized; `max_global` extra globally
    /// frequent tags cover unseen forms.
    pub fn score_sentence(&self, tokens: &[Token]) -> ScoreTable {
        const MAX_GLOBAL: usize = 5;
        let n = tokens.len();
        let candidates: Vec<Vec<Candidate>> = tokens
            .iter()
            .map(|token| {
                let mut rendered: Vec<String> = Vec::new();
                if let Some(counts) = self.tag_counts.get(&token.form) {
                    let mut seen: Vec<(&String, &usize)> = counts.iter().collect();
                    seen.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
                    rendered.extend(seen.into_iter().map(|(r, _)| r.clone()));
                }
                for r in self.tag_vocab.iter().take(MAX_GLOBAL) {
                    if !rendered.contains(r) {
                        rendered.push(r.clone());
                    }
                }
                if !rendered.iter().any(|r| r == BOTTOM_TEXT) {
                    rendered.push(BOTTOM_TEXT.to_string());
                }
                rendered
                    .into_iter()
                    .map(|r| {
                        let score = self.tag_score(&token.form, &r);
                        let tag = if r == BOTTOM_TEXT {
                            Supertag::Bottom
                        } else {
                            Supertag::Graph(
                                parse_asgraph(&r)
                                    .expect("treebank supertags re-parse"),
                            )
                        };
                        Candidate { tag, score }
                    })
                    .collect()
            })
            .collect();

        let mut edge_scores = std::collections::HashMap::new();
        for k in 1..=n {
            let (roots, total) = self
                .root_counts
                .get(&tokens[k - 1].pos)
                .copied()
                .unwrap_or((0, 0));
            let p = (roots as f64 + self.lambda) / (total as f64 + 2.0 * self.lambda);
            edge_scores.insert((0, k), p.ln());
            for i in 1..=n {
                if i == k {
                    continue;
                }
                let sig = (
                    tokens[i - 1].pos.clone(),
                    tokens[k - 1].pos.clone(),
                    bucket(i, k),
                );
                let (e, pairs) = self.edge_counts.get(&sig).copied().unwrap_or((0, 0));
                let p = (e as f64 + self.lambda) / (pairs as f64 + 2.0 * self.lambda);
                edge_scores.insert((i, k), p.ln());
            }
        }

        let v_ops = (self.op_vocab.len().max(1)) as f64;
        let mut label_scores = std::collections::HashMap::new();
        for i in 1..=n {
            for k in 1..=n {
                if i == k {
                    continue;
                }
                let dir = if k > i { 1i8 } else { -1 };
                let sig = (tokens[i - 1].pos.clone(), tokens[k - 1].pos.clone(), dir);
                let counts = self.op_counts.get(&sig);
                let total: usize = counts.map(|m| m.values().sum()).unwrap_or(0);
                for op in &self.op_vocab {
                    let c = counts
                        .and_then(|m| m.get(&op.to_string()))
                        .copied()
                        .unwrap_or(0) as f64;
                    let p = (c + self.lambda) / (total as f64 + self.lambda * v_ops);
                    label_scores.insert((i, k, op.clone()), p.ln());
                }
            }
        }
        let label_default = (self.lambda / (self.tag_total as f64 + self.lambda * v_ops)).ln();

        ScoreTable {
            tokens: tokens.to_vec(),
            candidates,
            edge_scores,
            label_scores,
            label_default,
        }
    }

    /// Parse-time front end: pattern preprocessing (with the training
    /// gazetteer) and POS guessing, then the score table.
    pub fn analyze(&self, forms: &[String]) -> (Vec<Token>, ScoreTable, Vec<PreRecord>) {
        let raw: Vec<Token> = forms
            .iter()
            .map(|f| Token {
                form: f.clone(),
                pos: "_".to_string(),
            })
            .collect();
        let gazetteer: Vec<Vec<String>> =
            self.name_spans.iter().map(|(s, _)| s.clone()).collect();
        let pre = preprocess(&raw, None, &gazetteer);
        let tokens: Vec<Token> = pre
            .tokens
            .iter()
            .map(|t| Token {
                form: t.form.clone(),
                pos: self.guess_pos(&t.form),
            })
            .collect();
        let table = self.score_sentence(&tokens);
        (tokens, table, pre.records)
    }

    /// Back end: relexicalize the decoded tree's supertags, evaluate, and
    /// re-expand collapsed patterns. Wiki entries come back through the
    /// training name spans when the surface was seen.
    pub fn realize(
        &self,
        tree: &crate::amdep::AmDepTree,
        records: &[PreRecord],
    ) -> Result<crate::asgraph::AsGraph, crate::amdep::EvalError> {
        let supertags: Vec<Supertag> = (1..=tree.n())
            .map(|i| match tree.supertag(i) {
                Supertag::Bottom => Supertag::Bottom,
                Supertag::Graph(g) => {
                    let label = self.labels.resolve(&tree.token(i).form);
                    match super::lexicon::relexicalize(g, &label) {
                        Ok(filled) => Supertag::Graph(filled),
                        Err(_) => Supertag::Graph(g.clone()),
                    }
                }
            })
            .collect();
        let relexed = tree
            .with_supertags(supertags)
            .expect("relexicalization keeps structure");
        let evaluated = relexed.eval()?;
        let mut records = records.to_vec();
        for r in records.iter_mut() {
            if let super::preprocess::Payload::Name { ops: _, wiki } = &mut r.payload {
                if wiki.is_none() {
                    if let Some((_, w)) = self
                        .name_spans
                        .iter()
                        .find(|(s, w)| s == &r.surface && w.is_some())
                    {
                        *wiki = w.clone();
                    }
                }
            }
        }
        Ok(postprocess(&evaluated.strip_sources(), &records))
    }
}
