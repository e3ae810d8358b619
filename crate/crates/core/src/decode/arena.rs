//! Per-decode type interning and memoized operation enumeration.
//!
//! Decoders key chart items by type; interning makes that a `u32` compare.
//! The arena also memoizes, per ordered type pair, every edge operation
//! that combines them and the type it yields. All state is local to one
//! decoder call, so sharing across threads never arises.

use std::collections::HashMap;
use std::rc::Rc;

use crate::amtypes::{apply_type, modify_type, AmType, EdgeOp};

pub(crate) type TypeId = u32;

pub(crate) struct TypeArena {
    types: Vec<AmType>,
    ids: HashMap<AmType, TypeId>,
    combos: HashMap<(TypeId, TypeId), Rc<Vec<(EdgeOp, TypeId)>>>,
    pub(crate) bottom: TypeId,
    pub(crate) empty: TypeId,
}

impl TypeArena {
    pub fn new() -> Self {
        let mut arena = TypeArena {
            types: Vec::new(),
            ids: HashMap::new(),
            combos: HashMap::new(),
            bottom: 0,
            empty: 0,
        };
        arena.bottom = arena.intern(&AmType::Bottom);
        arena.empty = arena.intern(&AmType::empty());
        arena
    }

    pub fn intern(&mut self, t: &AmType) -> TypeId {
        if let Some(&id) = self.ids.get(t) {
            return id;
        }
        let id = self.types.len() as TypeId;
        self.types.push(t.clone());
        self.ids.insert(t.clone(), id);
        id
    }

    pub fn get(&self, id: TypeId) -> &AmType {
        &self.types[id as usize]
    }

    pub fn open_sources(&self, id: TypeId) -> usize {
        self.get(id).open_source_count().unwrap_or(usize::MAX)
    }

    /// Every operation `op` with `op(head, dep)` defined, with its result.
    ///
    /// Apply candidates come from the head's sources whose annotation
    /// matches the dependent; modify candidates from the dependent's
    /// empty-annotated sources; IGNORE applies exactly when the dependent
    /// is bottom and the head is not.
    pub fn combos(&mut self, head: TypeId, dep: TypeId) -> Rc<Vec<(EdgeOp, TypeId)>> {
        if let Some(cached) = self.combos.get(&(head, dep)) {
            return Rc::clone(cached);
        }
        let mut out = Vec::new();
        let head_t = self.get(head).clone();
        let dep_t = self.get(dep).clone();
        if dep_t.is_bottom() {
            if !head_t.is_bottom() {
                out.push((EdgeOp::Ignore, head));
            }
        } else if !head_t.is_bottom() {
            for (a, ann) in head_t.entries() {
                if ann == &dep_t {
                    if let Some(result) = apply_type(&head_t, a, &dep_t) {
                        let id = self.intern(&result);
                        out.push((EdgeOp::Apply(a.clone()), id));
                    }
                }
            }
            for (a, ann) in dep_t.entries() {
                if ann.is_empty() && modify_type(&head_t, a, &dep_t).is_some() {
                    out.push((EdgeOp::Modify(a.clone()), head));
                }
            }
        }
        let rc = Rc::new(out);
        self.combos.insert((head, dep), Rc::clone(&rc));
        rc
    }
}
