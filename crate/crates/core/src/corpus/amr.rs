//! Plain-PENMAN reading and writing for AMR corpora: no source
//! decorations, reentrancy by variable reuse, constants as leaves.

use crate::asgraph::{parse_penman, render_amr as render_plain, AsGraph, ParseError, PenmanMode};

pub fn parse_amr(text: &str) -> Result<AsGraph, ParseError> {
    parse_penman(text, PenmanMode::Plain)
}

pub fn render_amr(g: &AsGraph) -> String {
    render_plain(g)
}

/// One corpus record: the sentence line and its graph.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub tokens: Vec<String>,
    pub pos: Vec<String>,
    pub amr: AsGraph,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("entry starting at line {line}: missing '# ::snt' token line")]
    MissingSentence { line: usize },
    #[error("entry starting at line {line}: POS count {pos} does not match {tokens} tokens")]
    PosArity { line: usize, tokens: usize, pos: usize },
    #[error("entry starting at line {line}: {source}")]
    Graph { line: usize, source: ParseError },
    #[error("entry starting at line {line}: no graph block")]
    MissingGraph { line: usize },
}

/// Reads the `# ::snt` / optional `# ::pos` / PENMAN-block format with
/// blank-line separated entries. Unknown `# ::` fields are skipped.
pub fn read_corpus(text: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut entries = Vec::new();
    let mut block_start = 0usize;
    let mut snt: Option<Vec<String>> = None;
    let mut pos: Option<Vec<String>> = None;
    let mut graph_text = String::new();
    let mut saw_any = false;

    let mut flush = |line: usize,
                     snt: &mut Option<Vec<String>>,
                     pos: &mut Option<Vec<String>>,
                     graph_text: &mut String,
                     entries: &mut Vec<CorpusEntry>|
     -> Result<(), CorpusError> {
        if snt.is_none() && graph_text.trim().is_empty() {
            return Ok(());
        }
        let tokens = snt.take().ok_or(CorpusError::MissingSentence { line })?;
        if graph_text.trim().is_empty() {
            return Err(CorpusError::MissingGraph { line });
        }
        let amr = parse_amr(graph_text.trim())
            .map_err(|source| CorpusError::Graph { line, source })?;
        let pos = match pos.take() {
            Some(p) => {
                if p.len() != tokens.len() {
                    return Err(CorpusError::PosArity {
                        line,
                        tokens: tokens.len(),
                        pos: p.len(),
                    });
                }
                p
            }
            None => vec!["_".to_string(); tokens.len()],
        };
        graph_text.clear();
        entries.push(CorpusEntry { tokens, pos, amr });
        Ok(())
    };

    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            flush(block_start + 1, &mut snt, &mut pos, &mut graph_text, &mut entries)?;
            block_start = idx + 1;
            saw_any = false;
            continue;
        }
        if !saw_any {
            block_start = idx;
            saw_any = true;
        }
        if let Some(rest) = trimmed.strip_prefix("# ::snt") {
            snt = Some(rest.split_whitespace().map(str::to_string).collect());
        } else if let Some(rest) = trimmed.strip_prefix("# ::pos") {
            pos = Some(rest.split_whitespace().map(str::to_string).collect());
        } else if trimmed.starts_with('#') {
            // Other metadata lines (ids, alignments) are ignored.
        } else {
            graph_text.push_str(line);
            graph_text.push('\n');
        }
    }
    flush(block_start + 1, &mut snt, &mut pos, &mut graph_text, &mut entries)?;
    Ok(entries)
}

/// Writes entries back in the corpus format.
pub fn write_corpus(entries: &[CorpusEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str("# ::snt ");
        out.push_str(&e.tokens.join(" "));
        out.push('\n');
        if e.pos.iter().any(|p| p != "_") {
            out.push_str("# ::pos ");
            out.push_str(&e.pos.join(" "));
            out.push('\n');
        }
        out.push_str(&render_amr(&e.amr));
        out.push_str("\n\n");
    }
    out
}
