//! Delexicalization: elementary graphs carry a LEX placeholder instead of
//! their word-specific label, shrinking the supertag inventory; the label
//! travels separately and is restored after decoding.

use thiserror::Error;

use crate::asgraph::{AsGraph, NodeId};
use crate::util::DetMap;

pub const LEX: &str = "LEX";

#[derive(Debug, Error, PartialEq)]
pub enum LexError {
    #[error("graph has no designated lexical node")]
    MissingLexicalNode,
    #[error("graph has no LEX placeholder to fill")]
    MissingPlaceholder,
}

/// Swaps the lexical node's label for the LEX placeholder, returning the
/// delexicalized graph and the label.
pub fn delexicalize(g: &AsGraph, lexical_node: NodeId) -> Result<(AsGraph, String), LexError> {
    let label = g
        .label(lexical_node)
        .ok_or(LexError::MissingLexicalNode)?
        .to_string();
    Ok((
        g.with_node_label(lexical_node, Some(LEX.to_string())),
        label,
    ))
}

/// Replaces the LEX placeholder with `label`.
pub fn relexicalize(g: &AsGraph, label: &str) -> Result<AsGraph, LexError> {
    let node = g
        .find_labeled_node(LEX)
        .ok_or(LexError::MissingPlaceholder)?;
    Ok(g.with_node_label(node, Some(label.to_string())))
}

/// Most-frequent-label lookup per form, the relexicalization fallback for
/// words without a supplied label. Unseen words resolve to themselves.
#[derive(Clone, Debug, Default)]
pub struct LabelLookup {
    counts: DetMap<String, DetMap<String, usize>>,
}

impl LabelLookup {
    pub fn observe(&mut self, form: &str, label: &str) {
        *self
            .counts
            .entry(form.to_string())
            .or_default()
            .entry(label.to_string())
            .or_default() += 1;
    }

    /// The label observed most often with `form`, ties broken
    /// alphabetically; the literal form when unseen.
    pub fn resolve(&self, form: &str) -> String {
        self.counts
            .get(form)
            .and_then(|labels| {
                let mut items: Vec<(&String, &usize)> = labels.iter().collect();
                items.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
                items.first().map(|(l, _)| (*l).clone())
            })
            .unwrap_or_else(|| form.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asgraph::parse_asgraph;

    #[test]
    fn delex_relex_round_trip() {
        let g = parse_asgraph("(u<root> / want :ARG0 (v<s>) :ARG1 (w<o(s)>))").unwrap();
        let lexical = g.find_labeled_node("want").unwrap();
        let (delexed, label) = delexicalize(&g, lexical).unwrap();
        assert_eq!(label, "want");
        assert!(delexed.find_labeled_node(LEX).is_some());
        let back = relexicalize(&delexed, &label).unwrap();
        assert!(back.is_isomorphic(&g));
    }

    #[test]
    fn relex_falls_back_to_literal() {
        let lookup = LabelLookup::default();
        assert_eq!(lookup.resolve("zorble"), "zorble");
        let mut seen = LabelLookup::default();
        seen.observe("wants", "want");
        seen.observe("wants", "want");
        seen.observe("wants", "wish");
        assert_eq!(seen.resolve("wants"), "want");
    }

    #[test]
    fn missing_lexical_node_is_an_error() {
        let g = parse_asgraph("(u<root> / want :ARG0 (v<s>))").unwrap();
        let placeholder = g.sources()[&crate::amtypes::SourceName::new("s").unwrap()];
        assert_eq!(
            delexicalize(&g, placeholder).unwrap_err(),
            LexError::MissingLexicalNode
        );
        assert_eq!(
            relexicalize(&g, "x").unwrap_err(),
            LexError::MissingPlaceholder
        );
    }
}
