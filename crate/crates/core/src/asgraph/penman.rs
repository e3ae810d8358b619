//! Reader and writer for graphs in PENMAN notation, plus the extended
//! dialect that marks the root and source nodes.
//!
//! Extended syntax adds node decorations after the variable: `<root>` on
//! exactly one node, `<s>` for an `s`-source, `<o(s)>` for an annotated
//! source. Inverse roles use the `-of` suffix and are normalized away:
//! `(p / person :ARG0-of (w / write))` stores an `ARG0` edge from the
//! write node to the person node.
//!
//! Rendering is canonical: node order is derived from the graph structure
//! alone, so two isomorphic graphs always render to identical text.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::amtypes::{AmType, SourceName};

use super::{AsGraph, Edge, GraphError, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenmanMode {
    /// Source decorations allowed; `<root>` required on exactly one node.
    Extended,
    /// No decorations; the outermost node is the root.
    Plain,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("duplicate source name {name} at byte {pos}")]
    DuplicateSource { name: String, pos: usize },
    #[error("multiple roots declared (second at byte {pos})")]
    MultipleRoots { pos: usize },
    #[error("no <root> decoration in extended graph")]
    NoRoot,
    #[error("variable {var} redefined at byte {pos}")]
    Redefined { var: String, pos: usize },
    #[error("unbound variable reference {var} at byte {pos}")]
    Unbound { var: String, pos: usize },
    #[error("{0}")]
    Graph(#[from] GraphError),
}

/// Parses the extended dialect (sources and root decoration).
pub fn parse_asgraph(text: &str) -> Result<AsGraph, ParseError> {
    parse(text, PenmanMode::Extended)
}

pub fn parse(text: &str, mode: PenmanMode) -> Result<AsGraph, ParseError> {
    Parser::new(text, mode).run()
}

/// Renders in the extended dialect with decorations.
pub fn render_asgraph(g: &AsGraph) -> String {
    render(g, PenmanMode::Extended)
}

/// Renders plain PENMAN; source markings are omitted.
pub fn render_amr(g: &AsGraph) -> String {
    render(g, PenmanMode::Plain)
}

fn is_atom_byte(b: u8) -> bool {
    !b.is_ascii_whitespace() && !matches!(b, b'(' | b')' | b'/' | b':' | b'<' | b'>' | b'"')
}

/// Bare tokens which denote constants rather than variables.
fn is_constant_atom(atom: &str) -> bool {
    atom == "-"
        || atom == "+"
        || atom.parse::<f64>().is_ok()
        || matches!(atom, "imperative" | "expressive" | "interrogative")
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    mode: PenmanMode,
    labels: Vec<Option<String>>,
    raw_edges: Vec<(NodeId, String, Target)>,
    vars: HashMap<String, NodeId>,
    sources: BTreeMap<SourceName, NodeId>,
    annotations: BTreeMap<SourceName, AmType>,
    declared_root: Option<NodeId>,
}

#[derive(Debug)]
enum Target {
    Node(NodeId),
    Atom(String, usize),
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, mode: PenmanMode) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
            mode,
            labels: Vec::new(),
            raw_edges: Vec::new(),
            vars: HashMap::new(),
            sources: BTreeMap::new(),
            annotations: BTreeMap::new(),
            declared_root: None,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {:?}", b as char))
        }
    }

    fn atom(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && is_atom_byte(self.bytes[self.pos]) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected token");
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .to_string())
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        // self.peek() == '"'
        let start = self.pos;
        self.pos += 1;
        while let Some(b) = self.peek() {
            self.pos += 1;
            match b {
                b'\\' => {
                    self.pos += 1;
                }
                b'"' => {
                    return Ok(std::str::from_utf8(&self.bytes[start..self.pos])
                        .unwrap()
                        .to_string())
                }
                _ => {}
            }
        }
        self.err("unterminated string")
    }

    fn run(mut self) -> Result<AsGraph, ParseError> {
        self.skip_ws();
        let top = self.node()?;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return self.err("trailing input after graph");
        }
        let root = match self.mode {
            PenmanMode::Extended => self.declared_root.ok_or(ParseError::NoRoot)?,
            PenmanMode::Plain => top,
        };

        // Resolve bare-atom targets: variable reference or constant leaf.
        let mut edges = Vec::new();
        for (from, role, target) in std::mem::take(&mut self.raw_edges) {
            let to = match target {
                Target::Node(id) => id,
                Target::Atom(atom, pos) => {
                    if let Some(&id) = self.vars.get(&atom) {
                        id
                    } else if is_constant_atom(&atom) {
                        self.labels.push(Some(atom));
                        self.labels.len() - 1
                    } else {
                        return Err(ParseError::Unbound { var: atom, pos });
                    }
                }
            };
            // Inverse roles store the base label with swapped endpoints.
            if let Some(base) = role.strip_suffix("-of").filter(|b| !b.is_empty()) {
                edges.push(Edge {
                    from: to,
                    to: from,
                    label: base.to_string(),
                });
            } else {
                edges.push(Edge {
                    from,
                    to,
                    label: role,
                });
            }
        }

        Ok(AsGraph::new(
            self.labels,
            edges,
            root,
            self.sources,
            self.annotations,
        )?)
    }

    fn node(&mut self) -> Result<NodeId, ParseError> {
        self.expect(b'(')?;
        let var = self.atom()?;
        if self.vars.contains_key(&var) {
            return Err(ParseError::Redefined {
                var,
                pos: self.pos,
            });
        }
        let id = self.labels.len();
        self.labels.push(None);
        self.vars.insert(var, id);

        self.skip_ws();
        while self.peek() == Some(b'<') {
            if self.mode == PenmanMode::Plain {
                return self.err("decorations are not allowed here");
            }
            self.decoration(id)?;
            self.skip_ws();
        }

        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let label = self.atom()?;
            self.labels[id] = Some(label);
        }

        loop {
            self.skip_ws();
            match self.peek() {
                Some(b':') => {
                    self.pos += 1;
                    let role = self.atom()?;
                    self.skip_ws();
                    let target = match self.peek() {
                        Some(b'(') => Target::Node(self.node()?),
                        Some(b'"') => {
                            let s = self.quoted()?;
                            self.labels.push(Some(s));
                            Target::Node(self.labels.len() - 1)
                        }
                        Some(b) if is_atom_byte(b) => {
                            let pos = self.pos;
                            Target::Atom(self.atom()?, pos)
                        }
                        _ => return self.err("expected a value after role"),
                    };
                    self.raw_edges.push((id, role, target));
                }
                Some(b')') => {
                    self.pos += 1;
                    return Ok(id);
                }
                _ => return self.err("expected ':' role or ')'"),
            }
        }
    }

    fn decoration(&mut self, node: NodeId) -> Result<(), ParseError> {
        let open_pos = self.pos;
        self.pos += 1; // consume '<'
        let start = self.pos;
        while self.peek().map_or(false, |b| b != b'>') {
            self.pos += 1;
        }
        if self.peek() != Some(b'>') {
            return self.err("unterminated decoration");
        }
        let content = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        self.pos += 1; // consume '>'

        if content == "root" {
            if self.declared_root.is_some() {
                return Err(ParseError::MultipleRoots { pos: open_pos });
            }
            self.declared_root = Some(node);
            return Ok(());
        }
        let (name_text, ann) = match content.find('(') {
            Some(i) => {
                let t = AmType::parse(&content[i..]).map_err(|e| ParseError::Syntax {
                    pos: open_pos,
                    msg: e.to_string(),
                })?;
                (&content[..i], t)
            }
            None => (content, AmType::empty()),
        };
        let name = SourceName::new(name_text).map_err(|e| ParseError::Syntax {
            pos: open_pos,
            msg: e.to_string(),
        })?;
        if self.sources.contains_key(&name) {
            return Err(ParseError::DuplicateSource {
                name: name.as_str().to_string(),
                pos: open_pos,
            });
        }
        self.sources.insert(name.clone(), node);
        if !ann.is_empty() {
            self.annotations.insert(name, ann);
        }
        Ok(())
    }
}

/// One traversal option out of a node: an incident edge together with the
/// direction it would be rendered in.
struct Branch {
    label: String,
    inverse: bool,
    edge_idx: usize,
    other: NodeId,
}

fn render(g: &AsGraph, mode: PenmanMode) -> String {
    let order = g.canonical_order();

    let mut incident: Vec<Vec<Branch>> = (0..g.node_count()).map(|_| Vec::new()).collect();
    for (idx, e) in g.edges().iter().enumerate() {
        incident[e.from].push(Branch {
            label: e.label.clone(),
            inverse: false,
            edge_idx: idx,
            other: e.to,
        });
        incident[e.to].push(Branch {
            label: format!("{}-of", e.label),
            inverse: true,
            edge_idx: idx,
            other: e.from,
        });
    }
    for branches in incident.iter_mut() {
        branches.sort_by(|a, b| {
            (&a.label, order[a.other], a.inverse).cmp(&(&b.label, order[b.other], b.inverse))
        });
    }

    let mut incident_counts = vec![0usize; g.node_count()];
    for e in g.edges() {
        incident_counts[e.from] += 1;
        incident_counts[e.to] += 1;
    }
    let source_by_node: HashMap<NodeId, &SourceName> =
        g.sources().iter().map(|(name, &id)| (id, name)).collect();

    // Constant leaves render inline without a variable.
    let inline: Vec<Option<String>> = (0..g.node_count())
        .map(|node| {
            let label = g.label(node)?;
            let constant = label.starts_with('"') || is_constant_atom(label);
            let leaf = !g.edges().iter().any(|e| e.from == node);
            (constant
                && leaf
                && node != g.root()
                && !source_by_node.contains_key(&node)
                && incident_counts[node] == 1)
                .then(|| label.to_string())
        })
        .collect();

    let mut names: Vec<Option<String>> = vec![None; g.node_count()];
    let mut used_edges = vec![false; g.edges().len()];
    let mut counter = 0usize;
    let mut out = String::new();
    emit(
        g,
        mode,
        g.root(),
        &incident,
        &inline,
        &source_by_node,
        &mut names,
        &mut used_edges,
        &mut counter,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn emit(
    g: &AsGraph,
    mode: PenmanMode,
    node: NodeId,
    incident: &[Vec<Branch>],
    inline: &[Option<String>],
    source_by_node: &HashMap<NodeId, &SourceName>,
    names: &mut Vec<Option<String>>,
    used_edges: &mut Vec<bool>,
    counter: &mut usize,
    out: &mut String,
) {
    *counter += 1;
    let name = format!("s{}", *counter);
    names[node] = Some(name.clone());

    out.push('(');
    out.push_str(&name);
    if mode == PenmanMode::Extended {
        if node == g.root() {
            out.push_str("<root>");
        }
        if let Some(src) = source_by_node.get(&node) {
            let ann = g.annotation(src);
            if ann.is_empty() {
                out.push_str(&format!("<{}>", src));
            } else {
                out.push_str(&format!("<{}{}>", src, ann));
            }
        }
    }
    if let Some(label) = g.label(node) {
        out.push_str(" / ");
        out.push_str(label);
    }

    for i in 0..incident[node].len() {
        let (label, edge_idx, other) = {
            let b = &incident[node][i];
            (b.label.clone(), b.edge_idx, b.other)
        };
        if used_edges[edge_idx] {
            continue;
        }
        used_edges[edge_idx] = true;
        out.push_str(" :");
        out.push_str(&label);
        out.push(' ');
        if let Some(existing) = &names[other] {
            out.push_str(existing);
        } else if let Some(text) = &inline[other] {
            names[other] = Some(text.clone());
            out.push_str(text);
        } else {
            emit(
                g,
                mode,
                other,
                incident,
                inline,
                source_by_node,
                names,
                used_edges,
                counter,
                out,
            );
        }
    }
    out.push(')');
}
