//! The corpus pipeline: read sentence/graph pairs, preprocess, align,
//! decompose into elementary graphs, delexicalize into a treebank, train
//! the count scorer, and evaluate outputs with Smatch.

pub mod align;
pub mod amr;
pub mod decompose;
pub mod lexicon;
pub mod preprocess;
pub mod scorer;
pub mod smatch;

pub use align::{align, AlignConfig, Alignment};
pub use amr::{parse_amr, read_corpus, render_amr, write_corpus, CorpusEntry};
pub use decompose::{decompose, BlobPolicy, Decomposed, Reject};
pub use lexicon::{delexicalize, relexicalize, LabelLookup, LEX};
pub use preprocess::{postprocess, preprocess, Payload, PreRecord, Preprocessed};
pub use scorer::{train_count_scorer, CountScorer};
pub use smatch::{smatch, smatch_exhaustive, SmatchScore};

use std::collections::BTreeMap;
use std::fmt;

use crate::amdep::treebank::{Treebank, TreebankEntry};
use crate::amdep::{is_projective, Supertag};
use crate::asgraph::AsGraph;
use crate::util::DetMap;

#[derive(Clone, Debug, Default)]
pub struct ConvertConfig {
    pub align: AlignConfig,
    pub policy: BlobPolicy,
}

/// Conversion statistics, printed as `key=value` lines. The corpus-scale
/// fields reported in the source experiments (rejection rate,
/// non-projectivity rate, supertag inventory shrinkage, removed
/// reentrancies) are all here so they could be computed on full data.
#[derive(Clone, Debug, Default)]
pub struct ConvertStats {
    pub sentences_total: usize,
    pub converted: usize,
    pub rejected: usize,
    pub reject_reasons: BTreeMap<String, usize>,
    pub reentrancies_removed: usize,
    pub nonprojective: usize,
    pub wiki_edges_removed: usize,
    pub supertags_lexicalized: usize,
    pub supertags_delexicalized: usize,
}

impl fmt::Display for ConvertStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sentences_total={}", self.sentences_total)?;
        writeln!(f, "converted={}", self.converted)?;
        writeln!(f, "rejected={}", self.rejected)?;
        let frac = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        writeln!(
            f,
            "rejected_fraction={:.4}",
            frac(self.rejected, self.sentences_total)
        )?;
        for (reason, count) in &self.reject_reasons {
            writeln!(f, "reject_reason[{reason}]={count}")?;
        }
        writeln!(f, "reentrancies_removed={}", self.reentrancies_removed)?;
        writeln!(f, "nonprojective={}", self.nonprojective)?;
        writeln!(
            f,
            "nonprojective_fraction={:.4}",
            frac(self.nonprojective, self.converted)
        )?;
        writeln!(f, "wiki_edges_removed={}", self.wiki_edges_removed)?;
        writeln!(f, "supertags_lexicalized={}", self.supertags_lexicalized)?;
        writeln!(
            f,
            "supertags_delexicalized={}",
            self.supertags_delexicalized
        )
    }
}

/// A successfully converted sentence, kept alongside the treebank for
/// round-trip checks and scorer extras.
#[derive(Clone, Debug)]
pub struct ConvertedSentence {
    pub corpus_index: usize,
    pub preprocessed_amr: AsGraph,
    pub records: Vec<PreRecord>,
}

#[derive(Clone, Debug)]
pub struct ConvertOutcome {
    pub treebank: Treebank,
    pub stats: ConvertStats,
    pub sentences: Vec<ConvertedSentence>,
    /// Name surfaces observed, with wiki entries, for the gazetteer.
    pub name_spans: Vec<(Vec<String>, Option<String>)>,
    /// (corpus index, reason) for every rejected sentence.
    pub rejections: Vec<(usize, String)>,
}

pub fn convert_corpus(entries: &[CorpusEntry], cfg: &ConvertConfig) -> ConvertOutcome {
    let mut outcome = ConvertOutcome {
        treebank: Treebank::default(),
        stats: ConvertStats {
            sentences_total: entries.len(),
            ..ConvertStats::default()
        },
        sentences: Vec::new(),
        name_spans: Vec::new(),
        rejections: Vec::new(),
    };
    let mut lexicalized: DetMap<String, ()> = DetMap::default();
    let mut delexicalized: DetMap<String, ()> = DetMap::default();

    for (index, entry) in entries.iter().enumerate() {
        let tokens: Vec<crate::amdep::Token> = entry
            .tokens
            .iter()
            .zip(&entry.pos)
            .map(|(form, pos)| crate::amdep::Token {
                form: form.clone(),
                pos: pos.clone(),
            })
            .collect();
        let pre = preprocess(&tokens, Some(&entry.amr), &[]);
        outcome.stats.wiki_edges_removed += pre.wiki_removed;
        let pre_amr = pre.amr.expect("training preprocessing keeps the graph");
        let alignment = align(&pre_amr, &pre.tokens, &cfg.align);
        let decomposed = match decompose(&pre_amr, &alignment, &pre.tokens, &cfg.policy) {
            Ok(d) => d,
            Err(reason) => {
                outcome.stats.rejected += 1;
                *outcome
                    .stats
                    .reject_reasons
                    .entry(reason.to_string())
                    .or_default() += 1;
                outcome.rejections.push((index, reason.to_string()));
                continue;
            }
        };
        outcome.stats.reentrancies_removed += decomposed.removed_reentrancies;
        if !is_projective(&decomposed.tree) {
            outcome.stats.nonprojective += 1;
        }
        for r in &pre.records {
            if let Payload::Name { wiki, .. } = &r.payload {
                if !outcome.name_spans.iter().any(|(s, _)| s == &r.surface) {
                    outcome.name_spans.push((r.surface.clone(), wiki.clone()));
                }
            }
        }

        // Delexicalize into the treebank entry.
        let tree = &decomposed.tree;
        let mut tags: Vec<Supertag> = Vec::new();
        let mut lex_labels: Vec<Option<String>> = Vec::new();
        for i in 1..=tree.n() {
            match tree.supertag(i) {
                Supertag::Bottom => {
                    tags.push(Supertag::Bottom);
                    lex_labels.push(None);
                }
                Supertag::Graph(g) => {
                    lexicalized.insert(crate::asgraph::render_asgraph(g), ());
                    match decomposed.lex_nodes[i - 1] {
                        Some(node) if g.label(node).is_some() => {
                            let (delexed, label) =
                                delexicalize(g, node).expect("labeled lexical node");
                            delexicalized.insert(crate::asgraph::render_asgraph(&delexed), ());
                            tags.push(Supertag::Graph(delexed));
                            lex_labels.push(Some(label));
                        }
                        _ => {
                            delexicalized.insert(crate::asgraph::render_asgraph(g), ());
                            tags.push(Supertag::Graph(g.clone()));
                            lex_labels.push(None);
                        }
                    }
                }
            }
        }
        let delexed_tree = tree
            .with_supertags(tags)
            .expect("delexicalization keeps structure");
        outcome.treebank.entries.push(TreebankEntry {
            tree: delexed_tree,
            lex_labels,
        });
        outcome.stats.converted += 1;
        outcome.sentences.push(ConvertedSentence {
            corpus_index: index,
            preprocessed_amr: pre_amr,
            records: pre.records,
        });
    }
    outcome.stats.supertags_lexicalized = lexicalized.len();
    outcome.stats.supertags_delexicalized = delexicalized.len();
    outcome
}

#[cfg(test)]
mod tests;
