//! Decoding factored score tables into well-typed dependency trees.
//!
//! A [`ScoreTable`] factors the score of a tree into per-token supertag
//! scores plus per-edge scores, where each edge contributes an attachment
//! part `E(i,k)` and a label part `L(op|i,k)`. Four decoders search for the
//! best well-typed tree under that objective:
//!
//! - [`projective_decode`]: chart decoder over adjacent spans; exact among
//!   projective trees.
//! - [`fixed_tree_decode`]: commits to a maximum-arborescence skeleton,
//!   then labels it optimally.
//! - [`exact_decode`]: enumerates all skeletons (exponential, guarded);
//!   the oracle the approximations are measured against.
//! - [`type_unaware_decode`]: argmax everything, ignore types, fall back
//!   to the largest well-typed subtree.
//!
//! The reported score of every result is recomputed from the returned tree
//! (supertag scores plus `E`+`L` over all edges, IGNORE edges included),
//! so it is exactly the objective value of what you got back.

mod arena;
mod cle;
mod exact;
mod fixed_tree;
mod hamiltonian;
mod projective;
mod type_unaware;

pub use cle::cle_arborescence;
pub use exact::{exact_decode, EXACT_GUARD_DEFAULT};
pub use fixed_tree::fixed_tree_decode;
pub use hamiltonian::{build_hamiltonian_instance, has_path_ending_at_last, hamiltonian_verdict};
pub use projective::projective_decode;
pub use type_unaware::type_unaware_decode;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amdep::{AmDepTree, Supertag, Token, TreeError, BOTTOM_TEXT};
use crate::amtypes::EdgeOp;
use crate::asgraph::{parse_asgraph, render_asgraph};

/// Practical stand-in for "never choose this": finite so score arithmetic
/// stays well-defined, hopeless enough to lose against anything real.
pub const FORBIDDEN_SCORE: f64 = -1.0e9;

#[derive(Clone, Debug)]
pub struct Candidate {
    pub tag: Supertag,
    pub score: f64,
}

/// Factored scores for one sentence. Token positions are 1..n; position 0
/// is the virtual root, which only appears as an edge origin.
#[derive(Clone, Debug)]
pub struct ScoreTable {
    pub tokens: Vec<Token>,
    /// Per token: supertag candidates. Exactly one per token is bottom.
    pub candidates: Vec<Vec<Candidate>>,
    /// Attachment scores; pairs not present are disallowed edges.
    pub edge_scores: HashMap<(usize, usize), f64>,
    /// Sparse label scores; anything unlisted scores `label_default`.
    pub label_scores: HashMap<(usize, usize, EdgeOp), f64>,
    pub label_default: f64,
}

#[derive(Debug, Error)]
pub enum ScoreTableError {
    #[error("token {0}: candidate list must contain exactly one bottom entry, found {1}")]
    BottomCount(usize, usize),
    #[error("non-finite score in {0}")]
    NonFinite(&'static str),
    #[error("edge ({0},{1}) out of range for {2} tokens")]
    EdgeRange(usize, usize, usize),
    #[error("empty sentence")]
    Empty,
    #[error("bad score table JSON: {0}")]
    Json(String),
}

impl ScoreTable {
    pub fn n(&self) -> usize {
        self.tokens.len()
    }

    pub fn validate(&self) -> Result<(), ScoreTableError> {
        let n = self.n();
        if n == 0 {
            return Err(ScoreTableError::Empty);
        }
        for (i, cands) in self.candidates.iter().enumerate() {
            let bottoms = cands.iter().filter(|c| c.tag.is_bottom()).count();
            if bottoms != 1 {
                return Err(ScoreTableError::BottomCount(i + 1, bottoms));
            }
            if cands.iter().any(|c| !c.score.is_finite()) {
                return Err(ScoreTableError::NonFinite("supertag scores"));
            }
        }
        for (&(i, k), s) in &self.edge_scores {
            if i > n || k == 0 || k > n || i == k {
                return Err(ScoreTableError::EdgeRange(i, k, n));
            }
            if !s.is_finite() {
                return Err(ScoreTableError::NonFinite("edge scores"));
            }
        }
        if self
            .label_scores
            .values()
            .any(|s| !s.is_finite())
            || !self.label_default.is_finite()
        {
            return Err(ScoreTableError::NonFinite("label scores"));
        }
        Ok(())
    }

    /// Attachment score of `i -> k`; disallowed edges are minus infinity.
    pub fn edge(&self, i: usize, k: usize) -> f64 {
        self.edge_scores
            .get(&(i, k))
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn label(&self, i: usize, k: usize, op: &EdgeOp) -> f64 {
        self.label_scores
            .get(&(i, k, op.clone()))
            .copied()
            .unwrap_or(self.label_default)
    }

    /// Score of tagging token `k` with bottom.
    pub fn bottom_score(&self, k: usize) -> f64 {
        self.candidates[k - 1]
            .iter()
            .find(|c| c.tag.is_bottom())
            .map(|c| c.score)
            .expect("validated tables have a bottom candidate per token")
    }

    /// Indices of the `k` best content candidates of token `i`, by score
    /// descending with input order as the tiebreak.
    pub fn top_k(&self, i: usize, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = self.candidates[i - 1]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.tag.is_bottom())
            .map(|(j, _)| j)
            .collect();
        idx.sort_by(|&a, &b| {
            let sa = self.candidates[i - 1][a].score;
            let sb = self.candidates[i - 1][b].score;
            sb.partial_cmp(&sa).unwrap().then(a.cmp(&b))
        });
        idx.truncate(k);
        idx
    }

    /// The score a candidate isomorphic to `tag` has at token `i`.
    pub fn candidate_score(&self, i: usize, tag: &Supertag) -> Option<f64> {
        self.candidates[i - 1]
            .iter()
            .find(|c| match (&c.tag, tag) {
                (Supertag::Bottom, Supertag::Bottom) => true,
                (Supertag::Graph(a), Supertag::Graph(b)) => a.is_isomorphic(b),
                _ => false,
            })
            .map(|c| c.score)
    }

    pub fn from_json(text: &str) -> Result<Self, ScoreTableError> {
        let raw: RawTable =
            serde_json::from_str(text).map_err(|e| ScoreTableError::Json(e.to_string()))?;
        let table = Self::from_raw(raw)?;
        table.validate()?;
        Ok(table)
    }

    fn from_raw(raw: RawTable) -> Result<Self, ScoreTableError> {
        let tokens = raw
            .tokens
            .into_iter()
            .map(|t| Token {
                form: t.form,
                pos: t.pos,
            })
            .collect();
        let mut candidates = Vec::new();
        for cands in raw.supertags {
            let mut list = Vec::new();
            for c in cands {
                let tag = if c.graph == BOTTOM_TEXT {
                    Supertag::Bottom
                } else {
                    Supertag::Graph(
                        parse_asgraph(&c.graph)
                            .map_err(|e| ScoreTableError::Json(e.to_string()))?,
                    )
                };
                list.push(Candidate {
                    tag,
                    score: c.score,
                });
            }
            candidates.push(list);
        }
        let edge_scores = raw.edges.into_iter().map(|(i, k, s)| ((i, k), s)).collect();
        let mut label_scores = HashMap::new();
        for (i, k, op, s) in raw.labels {
            let op = EdgeOp::parse(&op).map_err(|e| ScoreTableError::Json(e.to_string()))?;
            label_scores.insert((i, k, op), s);
        }
        Ok(ScoreTable {
            tokens,
            candidates,
            edge_scores,
            label_scores,
            label_default: raw.label_default,
        })
    }

    pub fn to_json(&self) -> String {
        let mut edges: Vec<(usize, usize, f64)> = self
            .edge_scores
            .iter()
            .map(|(&(i, k), &s)| (i, k, s))
            .collect();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut labels: Vec<(usize, usize, String, f64)> = self
            .label_scores
            .iter()
            .map(|(&(i, k, ref op), &s)| (i, k, op.to_string(), s))
            .collect();
        labels.sort_by(|a, b| (a.0, a.1, &a.2).cmp(&(b.0, b.1, &b.2)));
        let raw = RawTable {
            tokens: self
                .tokens
                .iter()
                .map(|t| RawToken {
                    form: t.form.clone(),
                    pos: t.pos.clone(),
                })
                .collect(),
            supertags: self
                .candidates
                .iter()
                .map(|cands| {
                    cands
                        .iter()
                        .map(|c| RawCandidate {
                            graph: match &c.tag {
                                Supertag::Graph(g) => render_asgraph(g),
                                Supertag::Bottom => BOTTOM_TEXT.to_string(),
                            },
                            score: c.score,
                        })
                        .collect()
                })
                .collect(),
            edges,
            labels,
            label_default: self.label_default,
        };
        serde_json::to_string(&raw).expect("score table serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    tokens: Vec<RawToken>,
    supertags: Vec<Vec<RawCandidate>>,
    edges: Vec<(usize, usize, f64)>,
    labels: Vec<(usize, usize, String, f64)>,
    label_default: f64,
}

#[derive(Serialize, Deserialize)]
struct RawToken {
    form: String,
    pos: String,
}

#[derive(Serialize, Deserialize)]
struct RawCandidate {
    graph: String,
    score: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeStatus {
    /// Full coverage with the empty result type.
    ExactGoal,
    /// Best full-coverage derivation left this many open sources.
    OpenSourceFallback(usize),
    /// Only a subtree could be made well-typed; the rest is ignored.
    SubtreeFallback,
}

impl std::fmt::Display for DecodeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecodeStatus::ExactGoal => f.write_str("exact-goal"),
            DecodeStatus::OpenSourceFallback(n) => write!(f, "open-source-fallback({n})"),
            DecodeStatus::SubtreeFallback => f.write_str("subtree-fallback"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub tree: AmDepTree,
    /// The factored objective recomputed from `tree`.
    pub score: f64,
    pub status: DecodeStatus,
    /// Chart or DP items built, for complexity reporting.
    pub items_built: usize,
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("{0}")]
    Table(#[from] ScoreTableError),
    #[error("k must be at least 1")]
    BadK,
    #[error("no derivation exists (no token has a content supertag)")]
    NoDerivation,
    #[error("sentence length {n} exceeds the exact-decoder guard {guard}")]
    GuardExceeded { n: usize, guard: usize },
    #[error("digraph needs at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("internal tree construction failed: {0}")]
    Tree(#[from] TreeError),
}

/// Recomputes the factored objective for a tree over this table: supertag
/// scores for every token plus `E`+`L` for every edge, IGNORE included.
/// The root designation itself is not an edge and contributes nothing.
pub fn tree_score(table: &ScoreTable, tree: &AmDepTree) -> f64 {
    let mut total = 0.0;
    for i in 1..=tree.n() {
        total += table
            .candidate_score(i, tree.supertag(i))
            .unwrap_or(FORBIDDEN_SCORE);
    }
    for e in tree.edges() {
        total += table.edge(e.head, e.dep) + table.label(e.head, e.dep, &e.op);
    }
    total
}

#[cfg(test)]
mod tests;
