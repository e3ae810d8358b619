//! Pre- and postprocessing around the conversion pipeline.
//!
//! Named entities, dates and numbers are collapsed to single NAME / DATE /
//! NUMBER tokens (and matching placeholder nodes in the graph) before
//! alignment, with records sufficient to reverse the collapse on parser
//! output. Wiki edges are removed outright. At parse time, with no graph
//! in hand, the same patterns are detected on the token side with regular
//! expressions plus an optional gazetteer of known name spans.

use std::collections::BTreeMap;

use crate::amdep::Token;
use crate::asgraph::{AsGraph, Edge, NodeId};
use crate::util::DetMap;

pub const NAME_TOKEN: &str = "NAME";
pub const DATE_TOKEN: &str = "DATE";
pub const NUMBER_TOKEN: &str = "NUMBER";

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Name {
        /// Quoted op constants in order (`"Agatha"`, `"Christie"`).
        ops: Vec<String>,
        /// Wiki constant removed from the entity node, if any.
        wiki: Option<String>,
    },
    Date {
        year: Option<String>,
        month: Option<String>,
        day: Option<String>,
    },
    Number {
        value: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreRecord {
    /// 1-based position of the placeholder token after collapsing.
    pub token_index: usize,
    /// The surface tokens the placeholder replaced.
    pub surface: Vec<String>,
    pub payload: Payload,
}

#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub tokens: Vec<Token>,
    pub amr: Option<AsGraph>,
    pub records: Vec<PreRecord>,
    pub wiki_removed: usize,
}

fn is_number(text: &str) -> bool {
    !text.is_empty() && text.parse::<f64>().is_ok()
}

fn is_date(text: &str) -> Option<(String, String, String)> {
    // YYYY-MM-DD only; enough for pattern handling without a date library.
    let parts: Vec<&str> = text.split('-').collect();
    if parts.len() == 3
        && parts[0].len() == 4
        && parts.iter().all(|p| p.chars().all(|c| c.is_ascii_digit()))
    {
        Some((
            parts[0].to_string(),
            parts[1].trim_start_matches('0').to_string(),
            parts[2].trim_start_matches('0').to_string(),
        ))
    } else {
        None
    }
}

fn is_capitalized(text: &str) -> bool {
    text.chars().next().map_or(false, |c| c.is_ascii_uppercase())
        && text.chars().all(|c| c.is_ascii_alphabetic() || c == '-' || c == '\'')
}

fn unquote(text: &str) -> &str {
    text.trim_matches('"')
}

/// A small graph editor over the mutable pieces of an [`AsGraph`]. The
/// pipeline works on plain AMRs, so sources never appear here.
struct GraphEdit {
    labels: Vec<Option<String>>,
    edges: Vec<Edge>,
    root: NodeId,
}

impl GraphEdit {
    fn new(g: &AsGraph) -> Self {
        GraphEdit {
            labels: (0..g.node_count())
                .map(|u| g.label(u).map(str::to_string))
                .collect(),
            edges: g.edges().to_vec(),
            root: g.root(),
        }
    }

    fn remove_nodes(&mut self, doomed: &[NodeId]) {
        let mut keep: Vec<NodeId> = (0..self.labels.len())
            .filter(|u| !doomed.contains(u))
            .collect();
        keep.sort_unstable();
        let remap: DetMap<NodeId, NodeId> = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        self.labels = keep
            .iter()
            .map(|&old| self.labels[old].clone())
            .collect();
        self.edges = self
            .edges
            .iter()
            .filter(|e| remap.contains_key(&e.from) && remap.contains_key(&e.to))
            .map(|e| Edge {
                from: remap[&e.from],
                to: remap[&e.to],
                label: e.label.clone(),
            })
            .collect();
        self.root = remap[&self.root];
    }

    fn build(self) -> AsGraph {
        AsGraph::new(
            self.labels,
            self.edges,
            self.root,
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .expect("preprocessing edits preserve graph invariants")
    }
}

/// Collapses patterns in a training pair (graph given) or in a bare token
/// sequence (graph absent).
pub fn preprocess(
    tokens: &[Token],
    amr: Option<&AsGraph>,
    gazetteer: &[Vec<String>],
) -> Preprocessed {
    match amr {
        Some(g) => preprocess_with_graph(tokens, g),
        None => preprocess_tokens_only(tokens, gazetteer),
    }
}

fn preprocess_with_graph(tokens: &[Token], amr: &AsGraph) -> Preprocessed {
    let mut edit = GraphEdit::new(amr);
    let mut records: Vec<PreRecord> = Vec::new();
    let mut wiki_removed = 0usize;
    let mut tokens: Vec<Token> = tokens.to_vec();

    // Wiki edges go first, entirely.
    let mut doomed: Vec<NodeId> = Vec::new();
    let mut wiki_of: DetMap<NodeId, String> = DetMap::default();
    for e in edit.edges.clone() {
        if e.label == "wiki" {
            wiki_of.insert(e.from, edit.labels[e.to].clone().unwrap_or_default());
            doomed.push(e.to);
            wiki_removed += 1;
        }
    }
    edit.edges.retain(|e| e.label != "wiki");
    // Remember wiki per entity by label before ids shift.
    let wiki_by_entity_label: DetMap<String, String> = wiki_of
        .iter()
        .filter_map(|(&node, w)| edit.labels[node].clone().map(|l| (l, w.clone())))
        .collect();
    edit.remove_nodes(&doomed);

    // Name nodes: a node labeled "name" reached by a "name" edge, with
    // quoted op children spelling the surface span.
    loop {
        let mut found: Option<(NodeId, Vec<(NodeId, String)>)> = None;
        for node in 0..edit.labels.len() {
            if edit.labels[node].as_deref() != Some("name") {
                continue;
            }
            if !edit
                .edges
                .iter()
                .any(|e| e.to == node && e.label == "name")
            {
                continue;
            }
            let mut ops: Vec<(usize, NodeId, String)> = edit
                .edges
                .iter()
                .filter(|e| e.from == node && e.label.starts_with("op"))
                .filter_map(|e| {
                    let idx: usize = e.label[2..].parse().ok()?;
                    let text = edit.labels[e.to].clone()?;
                    Some((idx, e.to, text))
                })
                .collect();
            if ops.is_empty() {
                continue;
            }
            ops.sort();
            found = Some((node, ops.into_iter().map(|(_, id, t)| (id, t)).collect()));
            break;
        }
        let Some((name_node, ops)) = found else { break };
        let surface: Vec<String> = ops.iter().map(|(_, t)| unquote(t).to_string()).collect();
        let Some(span_start) = find_span(&tokens, &surface) else {
            // No surface span: leave this name node alone.
            // Mark it visited by relabeling is not an option, so bail out.
            break;
        };
        let entity_wiki = edit
            .edges
            .iter()
            .find(|e| e.to == name_node && e.label == "name")
            .map(|e| e.from)
            .and_then(|entity| edit.labels[entity].clone())
            .and_then(|l| wiki_by_entity_label.get(&l).cloned());
        edit.labels[name_node] = Some(NAME_TOKEN.to_string());
        let op_nodes: Vec<NodeId> = ops.iter().map(|(id, _)| *id).collect();
        edit.remove_nodes(&op_nodes);
        tokens.splice(
            span_start..span_start + surface.len(),
            [Token {
                form: NAME_TOKEN.to_string(),
                pos: "NNP".to_string(),
            }],
        );
        records.push(PreRecord {
            token_index: span_start + 1,
            surface,
            payload: Payload::Name {
                ops: ops.iter().map(|(_, t)| t.clone()).collect(),
                wiki: entity_wiki,
            },
        });
    }

    // Date entities: collapse the attribute children, keep the node.
    loop {
        let mut found: Option<NodeId> = None;
        for node in 0..edit.labels.len() {
            if edit.labels[node].as_deref() == Some("date-entity") {
                found = Some(node);
                break;
            }
        }
        let Some(node) = found else { break };
        let mut field = |name: &str| -> Option<(NodeId, String)> {
            edit.edges
                .iter()
                .find(|e| e.from == node && e.label == name)
                .map(|e| (e.to, edit.labels[e.to].clone().unwrap_or_default()))
        };
        let year = field("year");
        let month = field("month");
        let day = field("day");
        let date_token_pos = tokens.iter().position(|t| is_date(&t.form).is_some());
        let Some(pos) = date_token_pos else { break };
        let surface = vec![tokens[pos].form.clone()];
        edit.labels[node] = Some(DATE_TOKEN.to_string());
        let doomed: Vec<NodeId> = [year.as_ref(), month.as_ref(), day.as_ref()]
            .iter()
            .flatten()
            .map(|(id, _)| *id)
            .collect();
        edit.remove_nodes(&doomed);
        tokens[pos] = Token {
            form: DATE_TOKEN.to_string(),
            pos: "CD".to_string(),
        };
        records.push(PreRecord {
            token_index: pos + 1,
            surface,
            payload: Payload::Date {
                year: year.map(|(_, v)| v),
                month: month.map(|(_, v)| v),
                day: day.map(|(_, v)| v),
            },
        });
    }

    // Number constants matched by a literal token.
    loop {
        let mut hit: Option<(NodeId, usize)> = None;
        for node in 0..edit.labels.len() {
            let Some(label) = edit.labels[node].clone() else { continue };
            if !is_number(&label) {
                continue;
            }
            if let Some(pos) = tokens.iter().position(|t| t.form == label) {
                hit = Some((node, pos));
                break;
            }
        }
        let Some((node, pos)) = hit else { break };
        let value = edit.labels[node].clone().unwrap();
        edit.labels[node] = Some(NUMBER_TOKEN.to_string());
        records.push(PreRecord {
            token_index: pos + 1,
            surface: vec![tokens[pos].form.clone()],
            payload: Payload::Number { value },
        });
        tokens[pos] = Token {
            form: NUMBER_TOKEN.to_string(),
            pos: "CD".to_string(),
        };
    }

    Preprocessed {
        tokens,
        amr: Some(edit.build()),
        records,
        wiki_removed,
    }
}

fn find_span(tokens: &[Token], surface: &[String]) -> Option<usize> {
    if surface.is_empty() || surface.len() > tokens.len() {
        return None;
    }
    (0..=tokens.len() - surface.len()).find(|&start| {
        surface
            .iter()
            .zip(&tokens[start..])
            .all(|(s, t)| t.form.eq_ignore_ascii_case(s))
    })
}

fn preprocess_tokens_only(tokens: &[Token], gazetteer: &[Vec<String>]) -> Preprocessed {
    let mut out: Vec<Token> = Vec::new();
    let mut records: Vec<PreRecord> = Vec::new();
    let mut i = 0usize;
    while i < tokens.len() {
        let form = &tokens[i].form;
        // Gazetteer spans take precedence, longest first.
        let hit = gazetteer
            .iter()
            .filter(|span| {
                !span.is_empty()
                    && tokens[i..].len() >= span.len()
                    && span
                        .iter()
                        .zip(&tokens[i..])
                        .all(|(s, t)| t.form.eq_ignore_ascii_case(s))
            })
            .max_by_key(|span| span.len());
        if let Some(span) = hit {
            let surface: Vec<String> = span.clone();
            records.push(PreRecord {
                token_index: out.len() + 1,
                surface: surface.clone(),
                payload: Payload::Name {
                    ops: surface.iter().map(|s| format!("\"{s}\"")).collect(),
                    wiki: None,
                },
            });
            out.push(Token {
                form: NAME_TOKEN.to_string(),
                pos: "NNP".to_string(),
            });
            i += span.len();
            continue;
        }
        if is_capitalized(form) {
            let mut j = i;
            while j < tokens.len() && is_capitalized(&tokens[j].form) {
                j += 1;
            }
            let surface: Vec<String> = tokens[i..j].iter().map(|t| t.form.clone()).collect();
            records.push(PreRecord {
                token_index: out.len() + 1,
                surface: surface.clone(),
                payload: Payload::Name {
                    ops: surface.iter().map(|s| format!("\"{s}\"")).collect(),
                    wiki: None,
                },
            });
            out.push(Token {
                form: NAME_TOKEN.to_string(),
                pos: "NNP".to_string(),
            });
            i = j;
            continue;
        }
        if let Some((y, m, d)) = is_date(form) {
            records.push(PreRecord {
                token_index: out.len() + 1,
                surface: vec![form.clone()],
                payload: Payload::Date {
                    year: Some(y),
                    month: Some(m),
                    day: Some(d),
                },
            });
            out.push(Token {
                form: DATE_TOKEN.to_string(),
                pos: "CD".to_string(),
            });
            i += 1;
            continue;
        }
        if is_number(form) {
            records.push(PreRecord {
                token_index: out.len() + 1,
                surface: vec![form.clone()],
                payload: Payload::Number {
                    value: form.clone(),
                },
            });
            out.push(Token {
                form: NUMBER_TOKEN.to_string(),
                pos: "CD".to_string(),
            });
            i += 1;
            continue;
        }
        out.push(tokens[i].clone());
        i += 1;
    }
    Preprocessed {
        tokens: out,
        amr: None,
        records,
        wiki_removed: 0,
    }
}

/// Reverses the collapse on an evaluated graph: NAME nodes regain their
/// name structure (and wiki entry when known), DATE nodes their fields,
/// NUMBER nodes their literal. Placeholder nodes are matched to records
/// in canonical render order.
pub fn postprocess(amr: &AsGraph, records: &[PreRecord]) -> AsGraph {
    let mut edit = GraphEdit::new(amr);
    let mut names: Vec<&PreRecord> = Vec::new();
    let mut dates: Vec<&PreRecord> = Vec::new();
    let mut numbers: Vec<&PreRecord> = Vec::new();
    for r in records {
        match r.payload {
            Payload::Name { .. } => names.push(r),
            Payload::Date { .. } => dates.push(r),
            Payload::Number { .. } => numbers.push(r),
        }
    }
    let order = amr.canonical_order();
    let by_kind = |labels: &[Option<String>], label: &str| -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = (0..labels.len())
            .filter(|&u| labels[u].as_deref() == Some(label))
            .collect();
        nodes.sort_by_key(|&u| order[u]);
        nodes
    };

    let name_nodes = by_kind(&edit.labels, NAME_TOKEN);
    let date_nodes = by_kind(&edit.labels, DATE_TOKEN);
    let number_nodes = by_kind(&edit.labels, NUMBER_TOKEN);
    for (node, record) in name_nodes.into_iter().zip(&names) {
        let Payload::Name { ops, wiki } = &record.payload else { unreachable!() };
        edit.labels[node] = Some("name".to_string());
        for (k, op) in ops.iter().enumerate() {
            let id = edit.labels.len();
            edit.labels.push(Some(op.clone()));
            edit.edges.push(Edge {
                from: node,
                to: id,
                label: format!("op{}", k + 1),
            });
        }
        if let Some(w) = wiki {
            // Reattach the wiki entry on the entity the name hangs off.
            if let Some(entity) = edit
                .edges
                .iter()
                .find(|e| e.to == node && e.label == "name")
                .map(|e| e.from)
            {
                let id = edit.labels.len();
                edit.labels.push(Some(w.clone()));
                edit.edges.push(Edge {
                    from: entity,
                    to: id,
                    label: "wiki".to_string(),
                });
            }
        }
    }
    for (node, record) in date_nodes.into_iter().zip(&dates) {
        let Payload::Date { year, month, day } = &record.payload else { unreachable!() };
        edit.labels[node] = Some("date-entity".to_string());
        for (field, value) in [("year", year), ("month", month), ("day", day)] {
            if let Some(v) = value {
                let id = edit.labels.len();
                edit.labels.push(Some(v.clone()));
                edit.edges.push(Edge {
                    from: node,
                    to: id,
                    label: field.to_string(),
                });
            }
        }
    }
    for (node, record) in number_nodes.into_iter().zip(&numbers) {
        let Payload::Number { value } = &record.payload else { unreachable!() };
        edit.labels[node] = Some(value.clone());
    }
    edit.build()
}
