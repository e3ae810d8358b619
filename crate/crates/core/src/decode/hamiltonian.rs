//! Hamiltonian-path reduction: builds decoding instances whose well-typed
//! trees are exactly the token sequences chained by `APP_s` edges ending
//! at the last token. The best tree scores n-1 precisely when the input
//! digraph has a Hamiltonian path ending at node n, which is what makes
//! exact decoding NP-hard and the exponential oracle honest about it.

use std::collections::HashMap;

use super::{DecodeError, DecodeResult, DecodeStatus, ScoreTable, FORBIDDEN_SCORE};
use crate::amdep::{Supertag, Token};
use crate::asgraph::parse_asgraph;

/// Builds the decoding instance for a simple digraph on nodes `1..=n`.
///
/// Tokens `1..n-1` each get a single supertag with one labeled node and an
/// annotated `s`-source leaf; token `n` gets one whose `s` carries a
/// different annotation. The annotations are chosen so that *every*
/// source in play is annotated (which blocks all modify attachments) and
/// so that only tokens `1..n-1` can take an apply child (exactly one):
/// well-typed full-coverage trees are then precisely the `APP_s` chains
/// ending at token `n`. Edge scores are 1 for digraph edges and 0
/// otherwise; all label scores are 0. Bottom candidates carry a hopeless
/// score so killing tokens never pays.
pub fn build_hamiltonian_instance(
    n: usize,
    digraph_edges: &[(usize, usize)],
) -> Result<ScoreTable, DecodeError> {
    if n < 2 {
        return Err(DecodeError::TooSmall(n));
    }
    let tokens: Vec<Token> = (1..=n)
        .map(|i| Token {
            form: i.to_string(),
            pos: "N".to_string(),
        })
        .collect();
    let candidates = (1..=n)
        .map(|i| {
            let graph = if i < n {
                // Type (s(s(s))): the s slot demands exactly the chain
                // type (s(s)) and the result keeps type (s(s)).
                parse_asgraph(&format!("(a<root> / n{i} :ARG0 (b<s(s(s))>))"))
            } else {
                // Type (s(s)): pluggable into any chain slot, but its own
                // slot demands (s), which nothing here can supply, so the
                // last token never takes a child.
                parse_asgraph(&format!("(a<root> / n{i} :ARG0 (b<s(s)>))"))
            }
            .expect("instance supertags are well-formed");
            vec![
                super::Candidate {
                    tag: Supertag::Graph(graph),
                    score: 0.0,
                },
                super::Candidate {
                    tag: Supertag::Bottom,
                    score: FORBIDDEN_SCORE,
                },
            ]
        })
        .collect();
    let mut present: HashMap<(usize, usize), bool> = HashMap::new();
    for &(u, v) in digraph_edges {
        if u != v && (1..=n).contains(&u) && (1..=n).contains(&v) {
            present.insert((u, v), true);
        }
    }
    let mut edge_scores = HashMap::new();
    for k in 1..=n {
        edge_scores.insert((0, k), 0.0);
        for i in 1..=n {
            if i != k {
                let w = if present.contains_key(&(i, k)) { 1.0 } else { 0.0 };
                edge_scores.insert((i, k), w);
            }
        }
    }
    Ok(ScoreTable {
        tokens,
        candidates,
        edge_scores,
        label_scores: HashMap::new(),
        label_default: 0.0,
    })
}

/// The YES/NO reading of a decode over a built instance.
///
/// Chains always leave exactly one open source (the head of the chain's
/// final value), so the result status is an open-source fallback; the
/// score alone decides. It reaches n-1 exactly when every chain edge is a
/// digraph edge, i.e. when a Hamiltonian path ending at n exists.
pub fn hamiltonian_verdict(n: usize, result: &DecodeResult) -> bool {
    result.status != DecodeStatus::SubtreeFallback && result.score == (n - 1) as f64
}

/// Brute-force reference: does the digraph have a Hamiltonian path that
/// ends at node `n`? Enumerates all orderings of the first n-1 nodes.
pub fn has_path_ending_at_last(n: usize, digraph_edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let mut adj = vec![vec![false; n + 1]; n + 1];
    for &(u, v) in digraph_edges {
        if u != v && u >= 1 && u <= n && v >= 1 && v <= n {
            adj[u][v] = true;
        }
    }
    let mut prefix: Vec<usize> = (1..n).collect();
    permute(&mut prefix, 0, &adj, n)
}

fn permute(prefix: &mut Vec<usize>, at: usize, adj: &[Vec<bool>], n: usize) -> bool {
    if at == prefix.len() {
        let ok_chain = prefix.windows(2).all(|w| adj[w[0]][w[1]]);
        return ok_chain && adj[*prefix.last().unwrap()][n];
    }
    for i in at..prefix.len() {
        prefix.swap(at, i);
        if permute(prefix, at + 1, adj, n) {
            prefix.swap(at, i);
            return true;
        }
        prefix.swap(at, i);
    }
    false
}
