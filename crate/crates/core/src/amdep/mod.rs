//! Dependency trees over token sequences whose edges are algebra
//! operations, plus the indexed terms they encode.
//!
//! Tokens are numbered 1..n. Each token carries a supertag: an elementary
//! graph, or the bottom marker for tokens without semantic content. Edges
//! are labeled `APP_a`, `MOD_a` or `IGNORE`; exactly one token is the
//! designated root. A tree is well-typed when its operations can be
//! executed in some order with every step defined; all such orders
//! evaluate to the same graph.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::amtypes::{op_result, AmType, EdgeOp};
use crate::asgraph::{AsGraph, OpError};

/// Marker text for the bottom supertag in treebank and score-table files.
pub const BOTTOM_TEXT: &str = "_|_";

#[derive(Clone, Debug, PartialEq)]
pub enum Supertag {
    Graph(AsGraph),
    Bottom,
}

impl Supertag {
    pub fn is_bottom(&self) -> bool {
        matches!(self, Supertag::Bottom)
    }

    pub fn graph(&self) -> Option<&AsGraph> {
        match self {
            Supertag::Graph(g) => Some(g),
            Supertag::Bottom => None,
        }
    }

    /// The type used by the checker: the graph's type, or `_|_`.
    pub fn type_of(&self) -> AmType {
        match self {
            Supertag::Graph(g) => g.type_of(),
            Supertag::Bottom => AmType::Bottom,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    pub pos: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepEdge {
    pub head: usize,
    pub dep: usize,
    pub op: EdgeOp,
}

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("token index {0} out of range 1..={1}")]
    TokenOutOfRange(usize, usize),
    #[error("token {0} has more than one incoming edge")]
    MultipleHeads(usize),
    #[error("root token {0} has an incoming edge")]
    RootHasHead(usize),
    #[error("token {0} is not reachable from the root")]
    Unreachable(usize),
    #[error("IGNORE edge points into non-bottom token {0}")]
    IgnoreIntoContent(usize),
    #[error("{op} edge points into bottom token {dep}")]
    OpIntoBottom { op: EdgeOp, dep: usize },
    #[error("bottom token {0} heads an edge; bottom tokens are leaves")]
    BottomHead(usize),
    #[error("root token {0} has the bottom supertag")]
    BottomRoot(usize),
    #[error("token/supertag arity mismatch: {tokens} tokens, {supertags} supertags")]
    Arity { tokens: usize, supertags: usize },
    #[error("empty sentence")]
    Empty,
}

/// An AM dependency tree: tokens, supertags, labeled edges, root.
#[derive(Clone, Debug, PartialEq)]
pub struct AmDepTree {
    tokens: Vec<Token>,
    supertags: Vec<Supertag>,
    edges: Vec<DepEdge>,
    root: usize,
}

impl AmDepTree {
    /// Validates the structural invariants: a spanning tree over all
    /// tokens rooted at `root`, IGNORE edges into bottom tokens only,
    /// apply/modify edges into content tokens only, bottom tokens always
    /// leaves, non-bottom root.
    pub fn new(
        tokens: Vec<Token>,
        supertags: Vec<Supertag>,
        edges: Vec<DepEdge>,
        root: usize,
    ) -> Result<Self, TreeError> {
        let n = tokens.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if supertags.len() != n {
            return Err(TreeError::Arity {
                tokens: n,
                supertags: supertags.len(),
            });
        }
        if root == 0 || root > n {
            return Err(TreeError::TokenOutOfRange(root, n));
        }
        if supertags[root - 1].is_bottom() {
            return Err(TreeError::BottomRoot(root));
        }
        let mut incoming = vec![0usize; n + 1];
        for e in &edges {
            for idx in [e.head, e.dep] {
                if idx == 0 || idx > n {
                    return Err(TreeError::TokenOutOfRange(idx, n));
                }
            }
            incoming[e.dep] += 1;
            if incoming[e.dep] > 1 {
                return Err(TreeError::MultipleHeads(e.dep));
            }
            if supertags[e.head - 1].is_bottom() {
                return Err(TreeError::BottomHead(e.head));
            }
            match (&e.op, supertags[e.dep - 1].is_bottom()) {
                (EdgeOp::Ignore, false) => return Err(TreeError::IgnoreIntoContent(e.dep)),
                (EdgeOp::Apply(_) | EdgeOp::Modify(_), true) => {
                    return Err(TreeError::OpIntoBottom {
                        op: e.op.clone(),
                        dep: e.dep,
                    })
                }
                _ => {}
            }
        }
        if incoming[root] > 0 {
            return Err(TreeError::RootHasHead(root));
        }
        // Reachability from the root makes the edge set a spanning tree:
        // n-1 edges with unique heads and no edge into the root.
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for e in &edges {
            children[e.head].push(e.dep);
        }
        let mut seen = vec![false; n + 1];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            for &v in &children[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        if let Some(u) = (1..=n).find(|&u| !seen[u]) {
            return Err(TreeError::Unreachable(u));
        }

        let mut edges = edges;
        edges.sort_by_key(|e| (e.head, e.dep));
        Ok(AmDepTree {
            tokens,
            supertags,
            edges,
            root,
        })
    }

    pub fn n(&self) -> usize {
        self.tokens.len()
    }

    pub fn token(&self, i: usize) -> &Token {
        &self.tokens[i - 1]
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn supertag(&self, i: usize) -> &Supertag {
        &self.supertags[i - 1]
    }

    pub fn edges(&self) -> &[DepEdge] {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// The incoming edge of token `i`, if any.
    pub fn incoming(&self, i: usize) -> Option<&DepEdge> {
        self.edges.iter().find(|e| e.dep == i)
    }

    /// Children of `i` in ascending token order.
    pub fn children(&self, i: usize) -> impl Iterator<Item = &DepEdge> {
        self.edges.iter().filter(move |e| e.head == i)
    }

    /// Number of tokens with a content supertag.
    pub fn content_tokens(&self) -> usize {
        self.supertags.iter().filter(|s| !s.is_bottom()).count()
    }

    /// Replaces the supertags, keeping structure. Used by relexicalization.
    pub fn with_supertags(&self, supertags: Vec<Supertag>) -> Result<Self, TreeError> {
        AmDepTree::new(self.tokens.clone(), supertags, self.edges.clone(), self.root)
    }

    /// Checks whether the tree encodes a well-typed term, returning the
    /// per-token subtree types if so.
    ///
    /// At each head, modify children leave the type unchanged and apply
    /// children consume and contribute sources, so definedness can depend
    /// on the order in which children are attached. The checker searches
    /// child orders per head (a subset walk, exact and small), accepting
    /// the tree iff some order makes every step defined.
    pub fn check_well_typed(&self) -> Option<TypedDecoration> {
        let mut types: Vec<Option<AmType>> = vec![None; self.n() + 1];
        self.subtree_type(self.root, &mut types)?;
        // Tokens outside the root's subtree cannot exist (spanning tree),
        // but bottom tokens never got visited bottom-up if they are leaves.
        let decoration = (1..=self.n())
            .map(|i| match &types[i] {
                Some(t) => t.clone(),
                None => self.supertag(i).type_of(),
            })
            .collect();
        Some(TypedDecoration {
            types: decoration,
            root: self.root,
        })
    }

    fn subtree_type(&self, head: usize, types: &mut Vec<Option<AmType>>) -> Option<AmType> {
        let kids: Vec<&DepEdge> = self.children(head).collect();
        for e in &kids {
            let t = self.subtree_type(e.dep, types)?;
            types[e.dep] = Some(t);
        }
        let start = self.supertag(head).type_of();
        let result = self
            .order_witness(&start, &kids, types)
            .map(|(_, final_type)| final_type)?;
        types[head] = Some(result.clone());
        Some(result)
    }

    /// Finds a child-processing order making every operation defined.
    ///
    /// Tries the canonical order first: modify children ascending, then
    /// apply children descending by token index, ignores last. If that
    /// fails, falls back to a subset walk that prefers small token
    /// indices, so the witness is deterministic.
    fn order_witness(
        &self,
        start: &AmType,
        kids: &[&DepEdge],
        types: &[Option<AmType>],
    ) -> Option<(Vec<usize>, AmType)> {
        let child_type = |i: usize| types[kids[i].dep].as_ref().unwrap();

        let canonical = canonical_child_order(kids);
        let mut t = start.clone();
        let mut ok = true;
        for &i in &canonical {
            match op_result(&kids[i].op, &t, child_type(i)) {
                Some(next) => t = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some((canonical, t));
        }

        // Subset walk over (processed-children, type) states.
        let full: u64 = if kids.len() == 64 {
            u64::MAX
        } else {
            (1u64 << kids.len()) - 1
        };
        let mut states: HashMap<u64, Vec<AmType>> = HashMap::new();
        states.insert(0, vec![start.clone()]);
        let mut frontier = vec![(0u64, start.clone())];
        let mut parent: HashMap<(u64, AmType), (u64, AmType, usize)> = HashMap::new();
        while let Some((mask, t)) = frontier.pop() {
            for (i, e) in kids.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    continue;
                }
                if let Some(next) = op_result(&e.op, &t, child_type(i)) {
                    let next_mask = mask | (1 << i);
                    let entry = states.entry(next_mask).or_default();
                    if !entry.contains(&next) {
                        entry.push(next.clone());
                        parent.insert(
                            (next_mask, next.clone()),
                            (mask, t.clone(), i),
                        );
                        frontier.push((next_mask, next));
                    }
                }
            }
        }
        let finals = states.get(&full)?;
        let final_type = finals.iter().min()?.clone();
        let mut order = Vec::with_capacity(kids.len());
        let mut cur = (full, final_type.clone());
        while let Some((mask, t, i)) = parent.get(&cur) {
            order.push(*i);
            cur = (*mask, t.clone());
        }
        order.reverse();
        Some((order, final_type))
    }

    /// Extracts the canonical indexed term this tree represents.
    /// IGNORE edges are skipped; their subtrees contribute nothing.
    pub fn term(&self) -> Option<AmTerm> {
        let mut types: Vec<Option<AmType>> = vec![None; self.n() + 1];
        self.subtree_type(self.root, &mut types)?;
        Some(self.term_at(self.root, &types))
    }

    fn term_at(&self, head: usize, types: &[Option<AmType>]) -> AmTerm {
        let kids: Vec<&DepEdge> = self.children(head).collect();
        let start = self.supertag(head).type_of();
        let (order, _) = self
            .order_witness(&start, &kids, types)
            .expect("term extraction requires a well-typed tree");
        let mut term = AmTerm::Const {
            graph: self
                .supertag(head)
                .graph()
                .expect("term heads carry content supertags")
                .clone(),
            index: head,
        };
        for i in order {
            let e = kids[i];
            if e.op == EdgeOp::Ignore {
                continue;
            }
            term = AmTerm::Op {
                op: e.op.clone(),
                head: e.head,
                dep: e.dep,
                left: Box::new(term),
                right: Box::new(self.term_at(e.dep, types)),
            };
        }
        term
    }

    /// Evaluates the tree to a graph. Requires well-typedness.
    pub fn eval(&self) -> Result<AsGraph, EvalError> {
        let term = self.term().ok_or(EvalError::NotWellTyped)?;
        term.eval().map_err(EvalError::Op)
    }
}

/// Canonical processing order over a head's children: modify children
/// ascending by token index, then apply children descending, ignores last.
/// Reading the resulting term outside-in, apply indices ascend.
fn canonical_child_order(kids: &[&DepEdge]) -> Vec<usize> {
    let mut mods: Vec<usize> = Vec::new();
    let mut apps: Vec<usize> = Vec::new();
    let mut ignores: Vec<usize> = Vec::new();
    for (i, e) in kids.iter().enumerate() {
        match e.op {
            EdgeOp::Modify(_) => mods.push(i),
            EdgeOp::Apply(_) => apps.push(i),
            EdgeOp::Ignore => ignores.push(i),
        }
    }
    mods.sort_by_key(|&i| kids[i].dep);
    apps.sort_by_key(|&i| std::cmp::Reverse(kids[i].dep));
    mods.into_iter().chain(apps).chain(ignores).collect()
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("tree is not well-typed")]
    NotWellTyped,
    #[error("operation failed during evaluation: {0}")]
    Op(OpError),
}

/// Per-token subtree types of a well-typed tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypedDecoration {
    types: Vec<AmType>,
    root: usize,
}

impl TypedDecoration {
    pub fn type_at(&self, token: usize) -> &AmType {
        &self.types[token - 1]
    }

    /// The sentence result type.
    pub fn root_type(&self) -> &AmType {
        self.type_at(self.root)
    }
}

/// An indexed term: leaves are elementary graphs at token positions,
/// internal nodes are operations annotated with head and dependent tokens.
#[derive(Clone, Debug, PartialEq)]
pub enum AmTerm {
    Const {
        graph: AsGraph,
        index: usize,
    },
    Op {
        op: EdgeOp,
        head: usize,
        dep: usize,
        left: Box<AmTerm>,
        right: Box<AmTerm>,
    },
}

impl AmTerm {
    /// The token that contributed the root of this term's value.
    pub fn head_index(&self) -> usize {
        match self {
            AmTerm::Const { index, .. } => *index,
            AmTerm::Op { head, .. } => *head,
        }
    }

    /// Evaluates bottom-up via the graph-level operations.
    pub fn eval(&self) -> Result<AsGraph, OpError> {
        match self {
            AmTerm::Const { graph, .. } => Ok(graph.clone()),
            AmTerm::Op {
                op, left, right, ..
            } => {
                let l = left.eval()?;
                let r = right.eval()?;
                match op {
                    EdgeOp::Apply(a) => l.apply(a, &r),
                    EdgeOp::Modify(a) => l.modify(a, &r),
                    EdgeOp::Ignore => Ok(l),
                }
            }
        }
    }
}

impl fmt::Display for AmTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmTerm::Const { graph, index } => {
                write!(f, "{}[{}]", graph.label(graph.root()).unwrap_or("_"), index)
            }
            AmTerm::Op {
                op,
                head,
                dep,
                left,
                right,
            } => write!(f, "{op}[{head},{dep}]({left}, {right})"),
        }
    }
}

/// True iff no two edges cross when tokens sit on a line and the root
/// attaches from virtual position 0.
pub fn is_projective(tree: &AmDepTree) -> bool {
    let mut spans: Vec<(usize, usize)> = tree
        .edges()
        .iter()
        .map(|e| (e.head.min(e.dep), e.head.max(e.dep)))
        .collect();
    spans.push((0, tree.root()));
    for (i, &(a1, b1)) in spans.iter().enumerate() {
        for &(a2, b2) in spans.iter().skip(i + 1) {
            let crosses = (a1 < a2 && a2 < b1 && b1 < b2) || (a2 < a1 && a1 < b2 && b2 < b1);
            if crosses {
                return false;
            }
        }
    }
    true
}

pub mod treebank;

#[cfg(test)]
pub(crate) mod tests;
