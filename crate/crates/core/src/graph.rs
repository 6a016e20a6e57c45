//! Labeled relations and disjoint updates.
//!
//! An [`LRel`] maps `(symbol, tag)` keys to edge sets; the `Plus` entry of a
//! symbol is expected to hold the transitive closure of its `Single` entry
//! (see [`wf_graph`]). An [`EDelta`] pairs insertions with deletions and is
//! disjoint per key by construction.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound;

use thiserror::Error;

use crate::closure::transitive_closure;
use crate::node::Node;
use crate::syntax::{Symbol, Tag};

pub type Key = (Symbol, Tag);

const MIN: Node = Node(0);
const MAX: Node = Node(u32::MAX);

/// Set of directed edges, indexed both by source and by target.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EGraph {
    fwd: BTreeSet<(Node, Node)>,
    rev: BTreeSet<(Node, Node)>,
}

static EMPTY: EGraph = EGraph { fwd: BTreeSet::new(), rev: BTreeSet::new() };

impl EGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn empty_ref() -> &'static EGraph {
        &EMPTY
    }

    pub fn insert(&mut self, a: Node, b: Node) -> bool {
        if self.fwd.insert((a, b)) {
            self.rev.insert((b, a));
            true
        } else {
            false
        }
    }

    pub fn remove(&mut self, a: Node, b: Node) -> bool {
        if self.fwd.remove(&(a, b)) {
            self.rev.remove(&(b, a));
            true
        } else {
            false
        }
    }

    pub fn contains(&self, a: Node, b: Node) -> bool {
        self.fwd.contains(&(a, b))
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    /// Edges in sorted `(source, target)` order.
    pub fn iter(&self) -> impl Iterator<Item = (Node, Node)> + '_ {
        self.fwd.iter().copied()
    }

    pub fn successors(&self, a: Node) -> impl Iterator<Item = Node> + '_ {
        self.fwd.range((Bound::Included((a, MIN)), Bound::Included((a, MAX)))).map(|&(_, b)| b)
    }

    pub fn predecessors(&self, b: Node) -> impl Iterator<Item = Node> + '_ {
        self.rev.range((Bound::Included((b, MIN)), Bound::Included((b, MAX)))).map(|&(_, a)| a)
    }

    /// Sources with at least one outgoing edge, ascending.
    pub fn sources(&self) -> impl Iterator<Item = Node> + '_ {
        let mut last = None;
        self.fwd.iter().filter_map(move |&(a, _)| {
            if last == Some(a) {
                None
            } else {
                last = Some(a);
                Some(a)
            }
        })
    }

    pub fn union(&self, other: &EGraph) -> EGraph {
        let mut out = self.clone();
        out.extend(other.iter());
        out
    }

    pub fn difference(&self, other: &EGraph) -> EGraph {
        self.iter().filter(|&(a, b)| !other.contains(a, b)).collect()
    }

    pub fn intersection(&self, other: &EGraph) -> EGraph {
        self.iter().filter(|&(a, b)| other.contains(a, b)).collect()
    }

    pub fn is_disjoint(&self, other: &EGraph) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().all(|(a, b)| !large.contains(a, b))
    }

    pub fn is_subset(&self, other: &EGraph) -> bool {
        self.iter().all(|(a, b)| other.contains(a, b))
    }
}

impl FromIterator<(Node, Node)> for EGraph {
    fn from_iter<I: IntoIterator<Item = (Node, Node)>>(iter: I) -> Self {
        let mut g = EGraph::new();
        g.extend(iter);
        g
    }
}

impl Extend<(Node, Node)> for EGraph {
    fn extend<I: IntoIterator<Item = (Node, Node)>>(&mut self, iter: I) {
        for (a, b) in iter {
            self.insert(a, b);
        }
    }
}

/// Read access to one edge set, possibly a virtual one.
pub trait EdgeLookup {
    fn contains(&self, a: Node, b: Node) -> bool;
    fn for_each_edge(&self, f: &mut dyn FnMut(Node, Node));
    fn for_each_succ(&self, a: Node, f: &mut dyn FnMut(Node));
    fn for_each_pred(&self, b: Node, f: &mut dyn FnMut(Node));
}

impl EdgeLookup for EGraph {
    fn contains(&self, a: Node, b: Node) -> bool {
        EGraph::contains(self, a, b)
    }

    fn for_each_edge(&self, f: &mut dyn FnMut(Node, Node)) {
        self.iter().for_each(|(a, b)| f(a, b))
    }

    fn for_each_succ(&self, a: Node, f: &mut dyn FnMut(Node)) {
        self.successors(a).for_each(f)
    }

    fn for_each_pred(&self, b: Node, f: &mut dyn FnMut(Node)) {
        self.predecessors(b).for_each(f)
    }
}

impl<T: EdgeLookup + ?Sized> EdgeLookup for &T {
    fn contains(&self, a: Node, b: Node) -> bool {
        (**self).contains(a, b)
    }

    fn for_each_edge(&self, f: &mut dyn FnMut(Node, Node)) {
        (**self).for_each_edge(f)
    }

    fn for_each_succ(&self, a: Node, f: &mut dyn FnMut(Node)) {
        (**self).for_each_succ(a, f)
    }

    fn for_each_pred(&self, b: Node, f: &mut dyn FnMut(Node)) {
        (**self).for_each_pred(b, f)
    }
}

/// Read access to a labeled relation.
pub trait RelView: Sync {
    type Edges<'a>: EdgeLookup
    where
        Self: 'a;

    fn edges(&self, sym: &Symbol, tag: Tag) -> Self::Edges<'_>;
}

/// Total map from `(symbol, tag)` to edge sets; absent keys are empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LRel {
    rel: BTreeMap<Key, EGraph>,
}

impl LRel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, sym: &Symbol, tag: Tag) -> &EGraph {
        self.rel.get(&(sym.clone(), tag)).unwrap_or(&EMPTY)
    }

    pub fn get_key(&self, key: &Key) -> &EGraph {
        self.rel.get(key).unwrap_or(&EMPTY)
    }

    /// Replaces the edge set at a key; empty sets are dropped.
    pub fn set(&mut self, sym: Symbol, tag: Tag, g: EGraph) {
        if g.is_empty() {
            self.rel.remove(&(sym, tag));
        } else {
            self.rel.insert((sym, tag), g);
        }
    }

    pub fn insert(&mut self, sym: &Symbol, tag: Tag, a: Node, b: Node) -> bool {
        self.rel.entry((sym.clone(), tag)).or_default().insert(a, b)
    }

    pub fn remove(&mut self, sym: &Symbol, tag: Tag, a: Node, b: Node) -> bool {
        match self.rel.entry((sym.clone(), tag)) {
            Entry::Occupied(mut e) => {
                let removed = e.get_mut().remove(a, b);
                if e.get().is_empty() {
                    e.remove();
                }
                removed
            }
            Entry::Vacant(_) => false,
        }
    }

    /// Nonempty entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&Key, &EGraph)> {
        self.rel.iter()
    }

    pub fn keys(&self) -> BTreeSet<Key> {
        self.rel.keys().cloned().collect()
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.rel.keys().map(|(s, _)| s.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rel.is_empty()
    }

    /// Total number of edges over all keys with the given tag.
    pub fn edge_count(&self, tag: Tag) -> usize {
        self.rel.iter().filter(|((_, t), _)| *t == tag).map(|(_, g)| g.len()).sum()
    }

    /// Copy restricted to the given symbols (both tags).
    pub fn restrict(&self, syms: &BTreeSet<Symbol>) -> LRel {
        LRel { rel: self.rel.iter().filter(|((s, _), _)| syms.contains(s)).map(|(k, g)| (k.clone(), g.clone())).collect() }
    }

    /// Largest node id mentioned plus one.
    pub fn node_bound(&self) -> u32 {
        self.rel.values().flat_map(|g| g.iter()).map(|(a, b)| a.0.max(b.0) + 1).max().unwrap_or(0)
    }
}

impl RelView for LRel {
    type Edges<'a> = &'a EGraph;

    fn edges(&self, sym: &Symbol, tag: Tag) -> &EGraph {
        self.get(sym, tag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("update is not disjoint: {symbol} {tag:?} edge ({}, {}) is both added and deleted", .edge.0 .0, .edge.1 .0)]
    Overlap { symbol: Symbol, tag: Tag, edge: (Node, Node) },
}

/// Disjoint pair of insertions and deletions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EDelta {
    add: LRel,
    del: LRel,
}

impl EDelta {
    pub fn new(add: LRel, del: LRel) -> Result<Self, GraphError> {
        for ((s, t), g) in add.iter() {
            let other = del.get(s, *t);
            if let Some(edge) = g.iter().find(|&(a, b)| other.contains(a, b)) {
                return Err(GraphError::Overlap { symbol: s.clone(), tag: *t, edge });
            }
        }
        Ok(EDelta { add, del })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Additions-only delta.
    pub fn additions(add: LRel) -> Self {
        EDelta { add, del: LRel::new() }
    }

    pub fn add(&self) -> &LRel {
        &self.add
    }

    pub fn del(&self) -> &LRel {
        &self.del
    }

    pub fn is_empty(&self) -> bool {
        self.add.is_empty() && self.del.is_empty()
    }

    /// Keys with a nonempty addition or deletion.
    pub fn keys(&self) -> BTreeSet<Key> {
        self.add.rel.keys().chain(self.del.rel.keys()).cloned().collect()
    }

    pub fn has_deletions(&self) -> bool {
        !self.del.is_empty()
    }

    pub fn is_disjoint(&self) -> bool {
        self.add.iter().all(|((s, t), g)| g.is_disjoint(self.del.get(s, *t)))
    }

    /// Rewrites the update at one key so that, once applied, the key holds
    /// its previous applied content minus `minus`, plus `plus`. Additions win
    /// over deletions; the result stays disjoint.
    pub fn modify(mut self, sym: &Symbol, tag: Tag, plus: &EGraph, minus: &EGraph) -> EDelta {
        let removed = minus.difference(plus);
        let add = self.add.get(sym, tag).difference(&removed).union(plus);
        let del = self.del.get(sym, tag).union(&removed).difference(plus);
        self.add.set(sym.clone(), tag, add);
        self.del.set(sym.clone(), tag, del);
        debug_assert!(self.is_disjoint());
        self
    }
}

/// `g \ d.del ∪ d.add`, pointwise per key.
pub fn apply_update(g: &LRel, d: &EDelta) -> LRel {
    let mut out = g.clone();
    for ((s, t), del) in d.del.iter() {
        let kept = out.get(s, *t).difference(del);
        out.set(s.clone(), *t, kept);
    }
    for ((s, t), add) in d.add.iter() {
        let merged = out.get(s, *t).union(add);
        out.set(s.clone(), *t, merged);
    }
    out
}

/// Update turning edge set `a` into exactly `b`: `(b \ a, a \ b)`.
pub fn lrel_diff(a: &EGraph, b: &EGraph) -> (EGraph, EGraph) {
    (b.difference(a), a.difference(b))
}

/// Lazy view of `g ⊕ d` that avoids copying `g`.
#[derive(Clone, Copy)]
pub struct Applied<'a> {
    pub base: &'a LRel,
    pub delta: &'a EDelta,
}

impl<'a> Applied<'a> {
    pub fn new(base: &'a LRel, delta: &'a EDelta) -> Self {
        Applied { base, delta }
    }

    pub fn get(&self, sym: &Symbol, tag: Tag) -> AppliedEdges<'a> {
        AppliedEdges { base: self.base.get(sym, tag), del: self.delta.del.get(sym, tag), add: self.delta.add.get(sym, tag) }
    }
}

impl RelView for Applied<'_> {
    type Edges<'b>
        = AppliedEdges<'b>
    where
        Self: 'b;

    fn edges(&self, sym: &Symbol, tag: Tag) -> AppliedEdges<'_> {
        self.get(sym, tag)
    }
}

/// `base \ del ∪ add` for a single key.
#[derive(Clone, Copy)]
pub struct AppliedEdges<'a> {
    base: &'a EGraph,
    del: &'a EGraph,
    add: &'a EGraph,
}

impl AppliedEdges<'_> {
    pub fn to_egraph(&self) -> EGraph {
        let mut g = self.base.difference(self.del);
        g.extend(self.add.iter());
        g
    }
}

impl EdgeLookup for AppliedEdges<'_> {
    fn contains(&self, a: Node, b: Node) -> bool {
        self.add.contains(a, b) || (self.base.contains(a, b) && !self.del.contains(a, b))
    }

    fn for_each_edge(&self, f: &mut dyn FnMut(Node, Node)) {
        for (a, b) in self.base.iter() {
            if !self.del.contains(a, b) && !self.add.contains(a, b) {
                f(a, b)
            }
        }
        self.add.iter().for_each(|(a, b)| f(a, b))
    }

    fn for_each_succ(&self, a: Node, f: &mut dyn FnMut(Node)) {
        for b in self.base.successors(a) {
            if !self.del.contains(a, b) && !self.add.contains(a, b) {
                f(b)
            }
        }
        self.add.successors(a).for_each(f)
    }

    fn for_each_pred(&self, b: Node, f: &mut dyn FnMut(Node)) {
        for a in self.base.predecessors(b) {
            if !self.del.contains(a, b) && !self.add.contains(a, b) {
                f(a)
            }
        }
        self.add.predecessors(b).for_each(f)
    }
}

/// Closure violation found by [`wf_witness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WfViolation {
    pub symbol: Symbol,
    pub edge: (Node, Node),
    /// `true` when the edge is reachable but missing from the `Plus` entry,
    /// `false` when a `Plus` edge has no supporting path.
    pub missing: bool,
}

impl std::fmt::Display for WfViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (a, b) = self.edge;
        if self.missing {
            write!(f, "{}+ lacks reachable edge ({a},{b})", self.symbol)
        } else {
            write!(f, "{}+ has edge ({a},{b}) with no supporting path", self.symbol)
        }
    }
}

/// Every symbol's `Plus` entry equals the closure of its `Single` entry.
pub fn wf_graph(g: &LRel) -> bool {
    wf_witness(g).is_none()
}

pub fn wf_witness(g: &LRel) -> Option<WfViolation> {
    g.symbols().into_iter().find_map(|s| wf_witness_at(g, &s))
}

pub fn wf_witness_at(g: &LRel, s: &Symbol) -> Option<WfViolation> {
    let closure = transitive_closure(g.get(s, Tag::Single));
    let plus = g.get(s, Tag::Plus);
    let missing = closure.iter().find(|&(a, b)| !plus.contains(a, b)).map(|edge| (edge, true));
    let spurious = plus.iter().find(|&(a, b)| !closure.contains(a, b)).map(|edge| (edge, false));
    let (edge, missing) = match (missing, spurious) {
        (Some(m), Some(sp)) => std::cmp::min(m, sp),
        (m, sp) => m.or(sp)?,
    };
    Some(WfViolation { symbol: s.clone(), edge, missing })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str) -> Symbol {
        Symbol::new(name).unwrap()
    }

    fn n(i: u32) -> Node {
        Node(i)
    }

    fn eg(edges: &[(u32, u32)]) -> EGraph {
        edges.iter().map(|&(a, b)| (n(a), n(b))).collect()
    }

    type Entry<'a> = (&'a str, Tag, &'a [(u32, u32)]);

    fn lrel(entries: &[Entry<'_>]) -> LRel {
        let mut g = LRel::new();
        for (sym, tag, edges) in entries {
            g.set(s(sym), *tag, eg(edges));
        }
        g
    }

    #[test]
    fn new_delta_checks_disjointness_per_key() {
        let add = lrel(&[("s", Tag::Single, &[(0, 1)])]);
        assert!(EDelta::new(add.clone(), LRel::new()).is_ok());
        let err = EDelta::new(add.clone(), add.clone()).unwrap_err();
        assert_eq!(err, GraphError::Overlap { symbol: s("s"), tag: Tag::Single, edge: (n(0), n(1)) });
        assert!(EDelta::new(add, lrel(&[("s", Tag::Plus, &[(0, 1)])])).is_ok());
    }

    #[test]
    fn apply_update_examples() {
        let g = lrel(&[("s", Tag::Single, &[(0, 1)])]);
        assert_eq!(apply_update(&g, &EDelta::empty()), g);
        let d = EDelta::new(lrel(&[("s", Tag::Single, &[(1, 2)])]), lrel(&[("s", Tag::Single, &[(0, 1)])])).unwrap();
        assert_eq!(apply_update(&g, &d), lrel(&[("s", Tag::Single, &[(1, 2)])]));
    }

    #[test]
    fn modify_examples() {
        let ab = eg(&[(0, 1)]);
        let d = EDelta::empty().modify(&s("s"), Tag::Single, &ab, &EGraph::new());
        assert_eq!(d.add().get(&s("s"), Tag::Single), &ab);
        assert!(d.del().is_empty());

        let d = EDelta::empty().modify(&s("s"), Tag::Single, &ab, &ab);
        assert_eq!(d.add().get(&s("s"), Tag::Single), &ab);
        assert!(d.del().is_empty());

        let d = EDelta::new(LRel::new(), lrel(&[("s", Tag::Single, &[(0, 1)])])).unwrap();
        let d = d.modify(&s("s"), Tag::Single, &ab, &EGraph::new());
        assert_eq!(d.add().get(&s("s"), Tag::Single), &ab);
        assert!(d.del().is_empty());
        assert!(d.is_disjoint());
    }

    #[test]
    fn modify_deletion_overrides_earlier_addition() {
        let ab = eg(&[(0, 1)]);
        let d = EDelta::additions(lrel(&[("s", Tag::Single, &[(0, 1)])]));
        let d = d.modify(&s("s"), Tag::Single, &EGraph::new(), &ab);
        assert!(d.add().is_empty());
        assert_eq!(d.del().get(&s("s"), Tag::Single), &ab);
    }

    #[test]
    fn lrel_diff_examples() {
        let x = eg(&[(0, 1), (2, 3)]);
        assert_eq!(lrel_diff(&x, &x), (EGraph::new(), EGraph::new()));
        assert_eq!(lrel_diff(&eg(&[(0, 1)]), &eg(&[(1, 2)])), (eg(&[(1, 2)]), eg(&[(0, 1)])));
    }

    #[test]
    fn wf_graph_examples() {
        assert!(wf_graph(&LRel::new()));
        let chain = lrel(&[("s", Tag::Single, &[(0, 1), (1, 2)]), ("s", Tag::Plus, &[(0, 1), (1, 2), (0, 2)])]);
        assert!(wf_graph(&chain));
        let broken = lrel(&[("s", Tag::Single, &[(0, 1), (1, 2)]), ("s", Tag::Plus, &[(0, 1), (1, 2)])]);
        assert_eq!(wf_witness(&broken), Some(WfViolation { symbol: s("s"), edge: (n(0), n(2)), missing: true }));
        let spurious = lrel(&[("s", Tag::Plus, &[(0, 1)])]);
        assert_eq!(wf_witness(&spurious), Some(WfViolation { symbol: s("s"), edge: (n(0), n(1)), missing: false }));
    }

    #[test]
    fn applied_view_matches_apply_update() {
        let g = lrel(&[("s", Tag::Single, &[(0, 1), (1, 2), (2, 0)])]);
        let d = EDelta::new(lrel(&[("s", Tag::Single, &[(0, 2), (1, 2)])]), lrel(&[("s", Tag::Single, &[(2, 0)])])).unwrap();
        let materialized = apply_update(&g, &d);
        let view = Applied::new(&g, &d).get(&s("s"), Tag::Single);
        assert_eq!(&view.to_egraph(), materialized.get(&s("s"), Tag::Single));
        let mut succ = Vec::new();
        view.for_each_succ(n(0), &mut |b| succ.push(b));
        succ.sort();
        assert_eq!(succ, vec![n(1), n(2)]);
        let mut pred = Vec::new();
        view.for_each_pred(n(2), &mut |a| pred.push(a));
        pred.sort();
        assert_eq!(pred, vec![n(0), n(1)]);
        assert!(!view.contains(n(2), n(0)));
    }

    #[test]
    fn sources_are_unique() {
        let g = eg(&[(0, 1), (0, 2), (3, 1)]);
        assert_eq!(g.sources().collect::<Vec<_>>(), vec![n(0), n(3)]);
    }
}
