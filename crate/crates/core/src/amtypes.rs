//! The recursive request types of the apply/modify algebra and the pure
//! type-level arithmetic the decoders branch on.
//!
//! A type is a finite map from source names to nested types (the
//! *annotation* each source demands of its argument), or the distinguished
//! bottom value `_|_` used for tokens without semantic content. All
//! operations here are total functions: where the algebra is undefined they
//! return `None` rather than an error, because decoders probe definedness
//! in hot loops.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A source name: a named open slot such as `s`, `o`, `o2`, `m`, `op1`.
///
/// Canonically lowercase over `[a-z0-9]`; `root` is reserved.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceName(String);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("invalid source name {0:?}: must be nonempty over [a-z0-9] and not \"root\"")]
    BadSourceName(String),
    #[error("type syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("duplicate source name {0} at one nesting level")]
    DuplicateSource(String),
}

impl SourceName {
    pub fn new(name: &str) -> Result<Self, TypeError> {
        let ok = !name.is_empty()
            && name
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
            && name != "root";
        if ok {
            Ok(SourceName(name.to_string()))
        } else {
            Err(TypeError::BadSourceName(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SourceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A type of the algebra: either `_|_` or a sorted map of annotated sources.
///
/// The map is kept in a `BTreeMap`, so equality, ordering and hashing are
/// structural and canonical by construction. `Bottom` is distinct from the
/// empty type `()`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AmType {
    Bottom,
    Map(BTreeMap<SourceName, AmType>),
}

impl AmType {
    /// The empty type `()`: no open sources.
    pub fn empty() -> Self {
        AmType::Map(BTreeMap::new())
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, AmType::Bottom)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, AmType::Map(m) if m.is_empty())
    }

    /// Builds a type from (source, annotation) pairs.
    pub fn from_entries<I: IntoIterator<Item = (SourceName, AmType)>>(
        entries: I,
    ) -> Result<Self, TypeError> {
        let mut map = BTreeMap::new();
        for (name, ann) in entries {
            if map.insert(name.clone(), ann).is_some() {
                return Err(TypeError::DuplicateSource(name.0));
            }
        }
        Ok(AmType::Map(map))
    }

    /// The sources of this type with their annotations; empty for `_|_`.
    pub fn entries(&self) -> impl Iterator<Item = (&SourceName, &AmType)> {
        match self {
            AmType::Bottom => None.into_iter().flatten(),
            AmType::Map(m) => Some(m.iter()).into_iter().flatten(),
        }
    }

    pub fn contains(&self, name: &SourceName) -> bool {
        matches!(self, AmType::Map(m) if m.contains_key(name))
    }

    /// The annotation of `name`, if this type has that source.
    pub fn annotation(&self, name: &SourceName) -> Option<&AmType> {
        match self {
            AmType::Bottom => None,
            AmType::Map(m) => m.get(name),
        }
    }

    /// Number of top-level open sources. `_|_` has no meaningful count.
    pub fn open_source_count(&self) -> Option<usize> {
        match self {
            AmType::Bottom => None,
            AmType::Map(m) => Some(m.len()),
        }
    }

    /// Parses the canonical syntax: `()`, `(s)`, `(o(s), s)`, `_|_`.
    pub fn parse(text: &str) -> Result<Self, TypeError> {
        let mut p = TypeParser {
            bytes: text.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        let t = p.parse_type()?;
        p.skip_ws();
        if p.pos != p.bytes.len() {
            return Err(TypeError::Syntax {
                pos: p.pos,
                msg: "trailing input".into(),
            });
        }
        Ok(t)
    }
}

impl fmt::Display for AmType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmType::Bottom => f.write_str("_|_"),
            AmType::Map(m) => {
                f.write_str("(")?;
                for (i, (name, ann)) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(&name.0)?;
                    if !ann.is_empty() {
                        // Nested annotation renders without an extra level of
                        // separators: o(s), never o((s)).
                        write!(f, "{}", ann)?;
                    }
                }
                f.write_str(")")
            }
        }
    }
}

struct TypeParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> TypeParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> TypeError {
        TypeError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn parse_type(&mut self) -> Result<AmType, TypeError> {
        if self.bytes[self.pos..].starts_with(b"_|_") {
            self.pos += 3;
            return Ok(AmType::Bottom);
        }
        if self.peek() != Some(b'(') {
            return Err(self.err("expected '(' or '_|_'"));
        }
        self.pos += 1;
        let mut map = BTreeMap::new();
        self.skip_ws();
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok(AmType::Map(map));
        }
        loop {
            self.skip_ws();
            let name = self.parse_name()?;
            self.skip_ws();
            let ann = if self.peek() == Some(b'(') {
                self.parse_type()?
            } else {
                AmType::empty()
            };
            if map.insert(name.clone(), ann).is_some() {
                return Err(TypeError::DuplicateSource(name.0));
            }
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                }
                Some(b')') => {
                    self.pos += 1;
                    return Ok(AmType::Map(map));
                }
                _ => return Err(self.err("expected ',' or ')'")),
            }
        }
    }

    fn parse_name(&mut self) -> Result<SourceName, TypeError> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_lowercase() || b.is_ascii_digit() {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.err("expected source name"));
        }
        SourceName::new(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap())
    }
}

/// An operation label on a dependency edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeOp {
    Apply(SourceName),
    Modify(SourceName),
    Ignore,
}

impl EdgeOp {
    pub fn parse(text: &str) -> Result<Self, TypeError> {
        if text == "IGNORE" {
            Ok(EdgeOp::Ignore)
        } else if let Some(rest) = text.strip_prefix("APP_") {
            Ok(EdgeOp::Apply(SourceName::new(rest)?))
        } else if let Some(rest) = text.strip_prefix("MOD_") {
            Ok(EdgeOp::Modify(SourceName::new(rest)?))
        } else {
            Err(TypeError::Syntax {
                pos: 0,
                msg: format!("unknown edge operation {text:?}"),
            })
        }
    }
}

impl fmt::Display for EdgeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeOp::Apply(a) => write!(f, "APP_{a}"),
            EdgeOp::Modify(a) => write!(f, "MOD_{a}"),
            EdgeOp::Ignore => f.write_str("IGNORE"),
        }
    }
}

/// Why a type-level operation is undefined.
///
/// The graph-level operations surface these directly, so the two levels
/// cannot disagree about definedness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeDefect {
    BottomOperand,
    MissingSource(SourceName),
    AnnotationMismatch {
        source: SourceName,
        expected: AmType,
        actual: AmType,
    },
    SharedSourceConflict(SourceName),
    AttachAnnotationNotEmpty(SourceName),
    ExtraModifierSource(SourceName),
}

impl fmt::Display for TypeDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeDefect::BottomOperand => f.write_str("operand is _|_"),
            TypeDefect::MissingSource(a) => write!(f, "head has no source {a}"),
            TypeDefect::AnnotationMismatch {
                source,
                expected,
                actual,
            } => write!(
                f,
                "annotation mismatch at {source}: expected {expected}, got {actual}"
            ),
            TypeDefect::SharedSourceConflict(a) => {
                write!(f, "shared source {a} has conflicting annotations")
            }
            TypeDefect::AttachAnnotationNotEmpty(a) => {
                write!(f, "modifier attachment source {a} must have the empty annotation")
            }
            TypeDefect::ExtraModifierSource(a) => {
                write!(f, "modifier source {a} is not present in the head")
            }
        }
    }
}

/// Type-level apply with the failure reason: fill source `a` of `head` with
/// an argument of type `arg`.
///
/// Defined when `a` is a source of `head` whose annotation equals `arg` and
/// no shared source of the remaining head and the argument carries
/// conflicting annotations. The result is the remaining head merged with the
/// argument's sources: an argument with open sources of its own hands them
/// up to the head, which is how re-entrant structures stay fillable.
pub fn apply_type_checked(
    head: &AmType,
    a: &SourceName,
    arg: &AmType,
) -> Result<AmType, TypeDefect> {
    let head_map = match head {
        AmType::Bottom => return Err(TypeDefect::BottomOperand),
        AmType::Map(m) => m,
    };
    if arg.is_bottom() {
        return Err(TypeDefect::BottomOperand);
    }
    let ann = head_map
        .get(a)
        .ok_or_else(|| TypeDefect::MissingSource(a.clone()))?;
    if ann != arg {
        return Err(TypeDefect::AnnotationMismatch {
            source: a.clone(),
            expected: ann.clone(),
            actual: arg.clone(),
        });
    }
    let mut result: BTreeMap<SourceName, AmType> = BTreeMap::new();
    for (name, t) in head_map {
        if name != a {
            result.insert(name.clone(), t.clone());
        }
    }
    for (name, t) in arg.entries() {
        match result.get(name) {
            Some(existing) if existing != t => {
                return Err(TypeDefect::SharedSourceConflict(name.clone()))
            }
            Some(_) => {}
            None => {
                result.insert(name.clone(), t.clone());
            }
        }
    }
    Ok(AmType::Map(result))
}

/// Total variant of [`apply_type_checked`]: `None` where undefined.
pub fn apply_type(head: &AmType, a: &SourceName, arg: &AmType) -> Option<AmType> {
    apply_type_checked(head, a, arg).ok()
}

/// Type-level modify with the failure reason: attach a modifier of type
/// `modifier` at its `a` source.
///
/// The modifier must request nothing of the head root (`a` annotated `()`)
/// and may carry no sources the head does not already have with the same
/// annotation. The head's type is returned unchanged.
pub fn modify_type_checked(
    head: &AmType,
    a: &SourceName,
    modifier: &AmType,
) -> Result<AmType, TypeDefect> {
    let head_map = match head {
        AmType::Bottom => return Err(TypeDefect::BottomOperand),
        AmType::Map(m) => m,
    };
    let modifier_map = match modifier {
        AmType::Bottom => return Err(TypeDefect::BottomOperand),
        AmType::Map(m) => m,
    };
    let ann = modifier_map
        .get(a)
        .ok_or_else(|| TypeDefect::MissingSource(a.clone()))?;
    if !ann.is_empty() {
        return Err(TypeDefect::AttachAnnotationNotEmpty(a.clone()));
    }
    for (name, t) in modifier_map {
        if name == a {
            continue;
        }
        match head_map.get(name) {
            Some(existing) if existing == t => {}
            Some(_) => return Err(TypeDefect::SharedSourceConflict(name.clone())),
            None => return Err(TypeDefect::ExtraModifierSource(name.clone())),
        }
    }
    Ok(head.clone())
}

/// Total variant of [`modify_type_checked`]: `None` where undefined.
pub fn modify_type(head: &AmType, a: &SourceName, modifier: &AmType) -> Option<AmType> {
    modify_type_checked(head, a, modifier).ok()
}

/// Dispatches an edge operation at the type level.
///
/// `IGNORE` keeps the head type when the dependent is `_|_` and is undefined
/// otherwise; apply/modify are undefined whenever either operand is `_|_`.
/// No operation ever yields `_|_`, so bottom never heads anything.
pub fn op_result(op: &EdgeOp, head: &AmType, dep: &AmType) -> Option<AmType> {
    match op {
        EdgeOp::Apply(a) => apply_type(head, a, dep),
        EdgeOp::Modify(a) => modify_type(head, a, dep),
        EdgeOp::Ignore => {
            if dep.is_bottom() && !head.is_bottom() {
                Some(head.clone())
            } else {
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> AmType {
        AmType::parse(s).unwrap()
    }

    fn src(s: &str) -> SourceName {
        SourceName::new(s).unwrap()
    }

    #[test]
    fn parse_render_round_trip() {
        for s in ["()", "(s)", "(o(s), s)", "_|_", "(m)", "(op1(s), op2(s))"] {
            assert_eq!(t(s).to_string(), s);
        }
        // Non-canonical input renders sorted.
        assert_eq!(t("(s, o(s))").to_string(), "(o(s), s)");
        assert_eq!(t("( s , o ( s ) )").to_string(), "(o(s), s)");
    }

    #[test]
    fn parse_rejects_duplicates_and_garbage() {
        assert_eq!(
            AmType::parse("(s, s)"),
            Err(TypeError::DuplicateSource("s".into()))
        );
        assert!(AmType::parse("(s").is_err());
        assert!(AmType::parse("s").is_err());
        assert!(AmType::parse("(S)").is_err());
        assert!(AmType::parse("(root)").is_err());
        assert!(AmType::parse("() x").is_err());
    }

    #[test]
    fn bottom_is_not_empty() {
        assert_ne!(t("_|_"), t("()"));
        assert!(t("_|_").is_bottom());
        assert!(!t("()").is_bottom());
        assert!(t("()").is_empty());
    }

    #[test]
    fn apply_type_control_verb_chain() {
        // The control-verb worked example: (o(s), s) --APP_o (s)--> (s) --APP_s ()--> ()
        assert_eq!(
            apply_type(&t("(o(s), s)"), &src("o"), &t("(s)")),
            Some(t("(s)"))
        );
        assert_eq!(apply_type(&t("(s)"), &src("s"), &t("()")), Some(t("()")));
        // Annotation mismatch: the o slot demands (s), not ().
        assert_eq!(apply_type(&t("(o(s), s)"), &src("o"), &t("()")), None);
    }

    #[test]
    fn apply_type_merges_argument_sources() {
        // The argument's own open sources join the head's remaining type.
        assert_eq!(
            apply_type(&t("(o)"), &src("o"), &t("()")),
            Some(t("()"))
        );
        let head = AmType::from_entries([(src("o"), t("(s)"))]).unwrap();
        assert_eq!(apply_type(&head, &src("o"), &t("(s)")), Some(t("(s)")));
        // Conflicting annotation on a shared source: undefined.
        let head2 = AmType::from_entries([(src("o"), t("(s(m))")), (src("s"), t("()"))]).unwrap();
        assert_eq!(apply_type(&head2, &src("o"), &t("(s(m))")), None);
    }

    #[test]
    fn apply_type_undefined_cases() {
        assert_eq!(apply_type(&t("_|_"), &src("s"), &t("()")), None);
        assert_eq!(apply_type(&t("(s)"), &src("s"), &t("_|_")), None);
        assert_eq!(apply_type(&t("()"), &src("s"), &t("()")), None);
    }

    #[test]
    fn modify_type_keeps_head() {
        assert_eq!(modify_type(&t("(s)"), &src("m"), &t("(m)")), Some(t("(s)")));
        // Modifier sharing a head source is fine and still identity.
        assert_eq!(
            modify_type(&t("(s)"), &src("m"), &t("(m, s)")),
            Some(t("(s)"))
        );
        // Extra modifier source not present in the head: undefined.
        assert_eq!(modify_type(&t("()"), &src("m"), &t("(m, s)")), None);
        // Modify target must be annotated with the empty type.
        let modifier = AmType::from_entries([(src("m"), t("(s)"))]).unwrap();
        assert_eq!(modify_type(&t("(s)"), &src("m"), &modifier), None);
        assert_eq!(modify_type(&t("_|_"), &src("m"), &t("(m)")), None);
    }

    #[test]
    fn ignore_requires_bottom_dependent() {
        assert_eq!(
            op_result(&EdgeOp::Ignore, &t("(s)"), &t("_|_")),
            Some(t("(s)"))
        );
        assert_eq!(op_result(&EdgeOp::Ignore, &t("(s)"), &t("()")), None);
        assert_eq!(
            op_result(&EdgeOp::Apply(src("s")), &t("_|_"), &t("()")),
            None
        );
        // No operation yields bottom, so bottom cannot head an edge.
        assert_eq!(op_result(&EdgeOp::Ignore, &t("_|_"), &t("_|_")), None);
    }

    #[test]
    fn open_source_counts() {
        assert_eq!(t("()").open_source_count(), Some(0));
        assert_eq!(t("(o(s), s)").open_source_count(), Some(2));
        assert_eq!(t("(s)").open_source_count(), Some(1));
        assert_eq!(t("_|_").open_source_count(), None);
    }

    #[test]
    fn edge_op_round_trip() {
        for s in ["APP_s", "APP_o2", "MOD_m", "IGNORE"] {
            assert_eq!(EdgeOp::parse(s).unwrap().to_string(), s);
        }
        assert!(EdgeOp::parse("ROOT").is_err());
        assert!(EdgeOp::parse("APP_").is_err());
    }
}
