//! Substitutions and nested-loop matching of literals and conjunctive bodies.

use std::sync::atomic::{AtomicBool, Ordering};

use thiserror::Error;

use crate::graph::{EdgeLookup, RelView};
use crate::node::{Node, Universe};
use crate::syntax::{Atom, CBody, Clause, Literal, Term};

/// Partial map from variable index to node.
///
/// Stored densely; the vector never ends in an unbound slot, so derived
/// equality and ordering are semantic.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution(Vec<Option<Node>>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, Node)>) -> Self {
        let mut s = Substitution::new();
        for (v, n) in pairs {
            s = s.bind(v, n).expect("conflicting bindings");
        }
        s
    }

    pub fn get(&self, v: u32) -> Option<Node> {
        self.0.get(v as usize).copied().flatten()
    }

    pub fn resolve(&self, t: Term) -> Option<Node> {
        match t {
            Term::Const(n) => Some(n),
            Term::Var(v) => self.get(v),
        }
    }

    /// Extends with `v ↦ n`; `None` if `v` is already bound elsewhere.
    pub fn bind(&self, v: u32, n: Node) -> Option<Substitution> {
        match self.get(v) {
            Some(m) if m == n => Some(self.clone()),
            Some(_) => None,
            None => {
                let mut out = self.clone();
                let i = v as usize;
                if out.0.len() <= i {
                    out.0.resize(i + 1, None);
                }
                out.0[i] = Some(n);
                Some(out)
            }
        }
    }

    pub fn bindings(&self) -> impl Iterator<Item = (u32, Node)> + '_ {
        self.0.iter().enumerate().filter_map(|(i, n)| n.map(|n| (i as u32, n)))
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|n| n.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Keeps only the given variables.
    pub fn project(&self, vars: impl IntoIterator<Item = u32>) -> Substitution {
        Substitution::from_pairs(vars.into_iter().filter_map(|v| self.get(v).map(|n| (v, n))))
    }
}

fn bind_term(s: &Substitution, t: Term, n: Node) -> Option<Substitution> {
    match t {
        Term::Const(c) => (c == n).then(|| s.clone()),
        Term::Var(v) => s.bind(v, n),
    }
}

static ENUMERATION_WARNED: AtomicBool = AtomicBool::new(false);

fn warn_enumeration() {
    if !ENUMERATION_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("equality between two unbound variables: enumerating the node universe");
    }
}

/// Pushes every minimal extension of `s` satisfying `atom` onto `out`.
pub(crate) fn match_atom_into<E: EdgeLookup + ?Sized>(
    edges: &E,
    atom: &Atom,
    s: &Substitution,
    universe: Universe,
    out: &mut Vec<Substitution>,
) {
    let (t1, t2) = atom.terms();
    match atom {
        Atom::Rel(..) => match (s.resolve(t1), s.resolve(t2)) {
            (Some(a), Some(b)) => {
                if edges.contains(a, b) {
                    out.push(s.clone());
                }
            }
            (Some(a), None) => edges.for_each_succ(a, &mut |b| out.extend(bind_term(s, t2, b))),
            (None, Some(b)) => edges.for_each_pred(b, &mut |a| out.extend(bind_term(s, t1, a))),
            (None, None) => edges.for_each_edge(&mut |a, b| {
                if let Some(s1) = bind_term(s, t1, a) {
                    out.extend(bind_term(&s1, t2, b));
                }
            }),
        },
        Atom::Eq(..) => match (s.resolve(t1), s.resolve(t2)) {
            (Some(a), Some(b)) => {
                if a == b {
                    out.push(s.clone());
                }
            }
            (Some(a), None) => out.extend(bind_term(s, t2, a)),
            (None, Some(b)) => out.extend(bind_term(s, t1, b)),
            (None, None) => {
                warn_enumeration();
                for v in universe.nodes() {
                    if let Some(s1) = bind_term(s, t1, v) {
                        out.extend(bind_term(&s1, t2, v));
                    }
                }
            }
        },
    }
}

pub(crate) fn canonicalize(mut v: Vec<Substitution>) -> Vec<Substitution> {
    v.sort_unstable();
    v.dedup();
    v
}

/// All minimal extensions of `s` satisfying `atom`, sorted and deduplicated.
/// `edges` is ignored for equality atoms.
pub fn match_atom<E: EdgeLookup + ?Sized>(edges: &E, atom: &Atom, s: &Substitution, universe: Universe) -> Vec<Substitution> {
    let mut out = Vec::new();
    match_atom_into(edges, atom, s, universe, &mut out);
    canonicalize(out)
}

/// Matches a literal against the relation selected by its `(symbol, tag)`.
pub fn match_literal<R: RelView + ?Sized>(g: &R, lit: &Literal, s: &Substitution, universe: Universe, out: &mut Vec<Substitution>) {
    match &lit.atom {
        Atom::Rel(sym, ..) => match_atom_into(&g.edges(sym, lit.tag), &lit.atom, s, universe, out),
        Atom::Eq(..) => match_atom_into(crate::graph::EGraph::empty_ref(), &lit.atom, s, universe, out),
    }
}

/// Left-to-right nested-loop fold over the body, starting from `{∅}`.
/// Result is sorted and deduplicated.
pub fn match_body<R: RelView + ?Sized>(g: &R, body: &CBody, universe: Universe) -> Vec<Substitution> {
    fold_literals(&body.lits, universe, |lit, s, univ, out| match_literal(g, lit, s, univ, out))
}

pub(crate) fn fold_literals<I, F>(lits: I, universe: Universe, mut step: F) -> Vec<Substitution>
where
    I: IntoIterator,
    F: FnMut(&I::Item, &Substitution, Universe, &mut Vec<Substitution>),
{
    let mut acc = vec![Substitution::new()];
    for lit in lits {
        let mut next = Vec::new();
        for s in &acc {
            step(&lit, s, universe, &mut next);
        }
        acc = canonicalize(next);
        if acc.is_empty() {
            break;
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("head variable V{0} is unbound after matching (safety check bypassed)")]
    Unbound(u32),
}

pub fn ground_head(s: &Substitution, head: (Term, Term)) -> Result<(Node, Node), MatchError> {
    let resolve = |t: Term| s.resolve(t).ok_or(MatchError::Unbound(t.var().unwrap_or_default()));
    Ok((resolve(head.0)?, resolve(head.1)?))
}

/// Total assignment of clause variables `0..n` to nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grounding(pub Vec<Node>);

impl Grounding {
    pub fn arity(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn apply(&self, t: Term) -> Term {
        match t {
            Term::Var(v) => Term::Const(self.0[v as usize]),
            c => c,
        }
    }
}

/// Replaces every variable with its node under `eta`.
pub fn ground_clause(eta: &Grounding, c: &Clause) -> Clause {
    assert!(eta.arity() >= c.arity, "grounding covers {} of {} variables", eta.arity(), c.arity);
    let bodies = c
        .bodies
        .iter()
        .map(|b| CBody::new(b.lits.iter().map(|l| Literal { tag: l.tag, atom: l.atom.map_terms(|t| eta.apply(t)) }).collect()))
        .collect();
    Clause::new((eta.apply(c.head.0), eta.apply(c.head.1)), bodies)
}
