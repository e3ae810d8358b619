//! Treebank serialization: one token per line, tab-separated columns
//! `ID FORM POS SUPERTAG LEXLABEL HEAD EDGE_LABEL`, sentences separated by
//! blank lines. Supertags are extended PENMAN (usually with a `LEX`
//! placeholder) or `_|_`; `HEAD` is `0` with label `ROOT` on the root row.

use thiserror::Error;

use crate::amtypes::EdgeOp;
use crate::asgraph::{parse_asgraph, render_asgraph};

use super::{AmDepTree, DepEdge, Supertag, Token, TreeError, BOTTOM_TEXT};

/// One converted sentence: the tree plus the lexical label column.
#[derive(Clone, Debug, PartialEq)]
pub struct TreebankEntry {
    pub tree: AmDepTree,
    pub lex_labels: Vec<Option<String>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Treebank {
    pub entries: Vec<TreebankEntry>,
}

#[derive(Debug, Error)]
pub enum TreebankError {
    #[error("line {line}: expected 7 tab-separated columns, got {got}")]
    Arity { line: usize, got: usize },
    #[error("line {line}: bad {what}: {detail}")]
    Field {
        line: usize,
        what: &'static str,
        detail: String,
    },
    #[error("line {line}: token ids must count 1..n (got {got})")]
    BadId { line: usize, got: String },
    #[error("line {line}: head {head} outside sentence of {n} tokens")]
    DanglingHead { line: usize, head: usize, n: usize },
    #[error("sentence at line {line}: expected exactly one ROOT row")]
    RootCount { line: usize },
    #[error("sentence at line {line}: {source}")]
    Tree { line: usize, source: TreeError },
}

pub fn read_treebank(text: &str) -> Result<Treebank, TreebankError> {
    let mut entries = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            if !block.is_empty() {
                entries.push(parse_sentence(&block)?);
                block.clear();
            }
        } else if !line.starts_with('#') {
            block.push((line_no, line));
        }
    }
    if !block.is_empty() {
        entries.push(parse_sentence(&block)?);
    }
    Ok(Treebank { entries })
}

fn parse_sentence(block: &[(usize, &str)]) -> Result<TreebankEntry, TreebankError> {
    let first_line = block[0].0;
    let n = block.len();
    let mut tokens = Vec::with_capacity(n);
    let mut supertags = Vec::with_capacity(n);
    let mut lex_labels = Vec::with_capacity(n);
    let mut edges = Vec::new();
    let mut root = None;

    for (i, &(line, text)) in block.iter().enumerate() {
        let cols: Vec<&str> = text.split('\t').collect();
        if cols.len() != 7 {
            return Err(TreebankError::Arity {
                line,
                got: cols.len(),
            });
        }
        let id: usize = cols[0].parse().map_err(|_| TreebankError::BadId {
            line,
            got: cols[0].to_string(),
        })?;
        if id != i + 1 {
            return Err(TreebankError::BadId {
                line,
                got: cols[0].to_string(),
            });
        }
        tokens.push(Token {
            form: cols[1].to_string(),
            pos: cols[2].to_string(),
        });
        supertags.push(if cols[3] == BOTTOM_TEXT {
            Supertag::Bottom
        } else {
            Supertag::Graph(parse_asgraph(cols[3]).map_err(|e| TreebankError::Field {
                line,
                what: "supertag",
                detail: e.to_string(),
            })?)
        });
        lex_labels.push(if cols[4] == "_" {
            None
        } else {
            Some(cols[4].to_string())
        });
        let head: usize = cols[5].parse().map_err(|_| TreebankError::Field {
            line,
            what: "head",
            detail: cols[5].to_string(),
        })?;
        if head > n {
            return Err(TreebankError::DanglingHead { line, head, n });
        }
        if head == 0 {
            if cols[6] != "ROOT" || root.is_some() {
                return Err(TreebankError::RootCount { line: first_line });
            }
            root = Some(id);
        } else {
            let op = EdgeOp::parse(cols[6]).map_err(|e| TreebankError::Field {
                line,
                what: "edge label",
                detail: e.to_string(),
            })?;
            edges.push(DepEdge { head, dep: id, op });
        }
    }

    let root = root.ok_or(TreebankError::RootCount { line: first_line })?;
    let tree = AmDepTree::new(tokens, supertags, edges, root)
        .map_err(|source| TreebankError::Tree {
            line: first_line,
            source,
        })?;
    Ok(TreebankEntry { tree, lex_labels })
}

pub fn write_treebank(tb: &Treebank) -> String {
    let mut out = String::new();
    for entry in &tb.entries {
        write_entry(entry, &mut out);
        out.push('\n');
    }
    out
}

fn write_entry(entry: &TreebankEntry, out: &mut String) {
    let tree = &entry.tree;
    for i in 1..=tree.n() {
        let token = tree.token(i);
        let supertag = match tree.supertag(i) {
            Supertag::Graph(g) => render_asgraph(g),
            Supertag::Bottom => BOTTOM_TEXT.to_string(),
        };
        let lex = entry.lex_labels[i - 1].as_deref().unwrap_or("_");
        let (head, label) = if i == tree.root() {
            (0, "ROOT".to_string())
        } else {
            let e = tree
                .incoming(i)
                .expect("non-root token has an incoming edge");
            (e.head, e.op.to_string())
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            i, token.form, token.pos, supertag, lex, head, label
        ));
    }
}
