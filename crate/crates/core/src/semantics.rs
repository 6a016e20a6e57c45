//! Brute-force satisfaction oracle.
//!
//! Everything here works by enumerating groundings over the whole node
//! universe. None of it goes through the matching or engine code, so it can
//! be used to check them. Enumeration is bounded by a budget; exceeding it
//! is an error, never a silent pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::exec::Exec;
use crate::graph::{apply_update, EDelta, EGraph, LRel};
use crate::matching::Grounding;
use crate::node::{Node, Universe};
use crate::syntax::{bare_symbols, symbols_of_clause, Atom, CBody, Clause, Literal, Program, Symbol, Tag, Term};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("grounding enumeration needs {needed} assignments for `{symbol}`, over the budget of {budget}")]
    Budget { symbol: Symbol, needed: u128, budget: u64 },
    #[error("program is not stratified")]
    NotStratified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub universe: Universe,
    pub budget: u64,
    pub exec: Exec,
}

impl OracleConfig {
    pub fn new(universe: Universe) -> Self {
        OracleConfig { universe, budget: DEFAULT_BUDGET, exec: Exec::default() }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

/// Literal whose two terms are constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundLiteral {
    pub tag: Tag,
    pub atom: Atom,
}

impl GroundLiteral {
    pub fn new(lit: &Literal) -> Option<Self> {
        let (a, b) = lit.atom.terms();
        matches!((a, b), (Term::Const(_), Term::Const(_))).then(|| GroundLiteral { tag: lit.tag, atom: lit.atom.clone() })
    }
}

/// A grounding that satisfies some disjunct while the head fact is absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub symbol: Symbol,
    pub disjunct: usize,
    pub grounding: Grounding,
    pub head: (Node, Node),
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.head;
        write!(f, "{}({a},{b}) not derived; disjunct {} holds under", self.symbol, self.disjunct)?;
        for (i, n) in self.grounding.0.iter().enumerate() {
            write!(f, " V{i}={n}")?;
        }
        Ok(())
    }
}

fn constant(t: Term) -> Node {
    match t {
        Term::Const(n) => n,
        Term::Var(v) => panic!("literal is not ground: V{v}"),
    }
}

pub fn sat_literal(g: &LRel, l: &GroundLiteral) -> bool {
    match &l.atom {
        Atom::Rel(s, a, b) => g.get(s, l.tag).contains(constant(*a), constant(*b)),
        Atom::Eq(a, b) => constant(*a) == constant(*b),
    }
}

/// Conjunction over a ground body. Panics on a non-ground literal.
pub fn sat_body(g: &LRel, b: &CBody) -> bool {
    b.lits.iter().all(|l| sat_literal(g, &GroundLiteral::new(l).expect("body is not ground")))
}

fn subst(eta: &[Node], t: Term) -> Term {
    match t {
        Term::Var(v) => Term::Const(eta[v as usize]),
        c => c,
    }
}

fn instantiate(eta: &[Node], b: &CBody) -> CBody {
    CBody::new(b.lits.iter().map(|l| Literal { tag: l.tag, atom: l.atom.map_terms(|t| subst(eta, t)) }).collect())
}

fn check_budget(symbol: &Symbol, arity: u32, cfg: &OracleConfig) -> Result<u128, SemanticsError> {
    let needed = (cfg.universe.len() as u128).checked_pow(arity).unwrap_or(u128::MAX);
    if needed > cfg.budget as u128 {
        return Err(SemanticsError::Budget { symbol: symbol.clone(), needed, budget: cfg.budget });
    }
    Ok(needed)
}

/// Calls `f` on every assignment of `0..arity` whose first slot is `first`
/// (or on the single empty assignment when `arity == 0`).
fn for_each_grounding(universe: Universe, arity: u32, first: Option<Node>, mut f: impl FnMut(&[Node]) -> bool) -> bool {
    let n = universe.0;
    let arity = arity as usize;
    if arity == 0 {
        return f(&[]);
    }
    if n == 0 {
        return true;
    }
    let mut eta = vec![Node(0); arity];
    if let Some(first) = first {
        eta[0] = first;
    }
    let fixed = usize::from(first.is_some());
    loop {
        if !f(&eta) {
            return false;
        }
        let mut i = arity;
        loop {
            if i == fixed {
                return true;
            }
            i -= 1;
            if eta[i].0 + 1 < n {
                eta[i] = Node(eta[i].0 + 1);
                break;
            }
            eta[i] = Node(0);
        }
    }
}

/// Searches groundings of `c` for one that violates clause satisfaction.
fn clause_violation(g: &LRel, s: &Symbol, c: &Clause, cfg: &OracleConfig) -> Result<Option<Counterexample>, SemanticsError> {
    check_budget(s, c.arity, cfg)?;
    let heads = g.get(s, Tag::Single);
    let search = |first: Option<Node>| {
        let mut found = None;
        for_each_grounding(cfg.universe, c.arity, first, |eta| {
            let head = (constant(subst(eta, c.head.0)), constant(subst(eta, c.head.1)));
            if heads.contains(head.0, head.1) {
                return true;
            }
            if let Some(i) = c.bodies.iter().position(|b| sat_body(g, &instantiate(eta, b))) {
                found = Some(Counterexample { symbol: s.clone(), disjunct: i, grounding: Grounding(eta.to_vec()), head });
                return false;
            }
            true
        });
        found
    };
    if c.arity == 0 || cfg.universe.is_empty() {
        return Ok(search(None));
    }
    let shards = cfg.exec.map_range(cfg.universe.len(), |v| search(Some(Node(v as u32))));
    Ok(shards.into_iter().flatten().next())
}

/// Every grounding that satisfies a disjunct also satisfies the head.
pub fn sat_clause(g: &LRel, s: &Symbol, c: &Clause, cfg: &OracleConfig) -> Result<bool, SemanticsError> {
    Ok(clause_violation(g, s, c, cfg)?.is_none())
}

/// First violated clause among the intensional symbols in `syms`, if any.
pub fn program_violation(
    g: &LRel,
    p: &Program,
    syms: &BTreeSet<Symbol>,
    cfg: &OracleConfig,
) -> Result<Option<Counterexample>, SemanticsError> {
    for s in syms {
        if let Some(c) = p.clause(s) {
            if let Some(cex) = clause_violation(g, s, c, cfg)? {
                return Ok(Some(cex));
            }
        }
    }
    Ok(None)
}

pub fn sat_program(g: &LRel, p: &Program, syms: &BTreeSet<Symbol>, cfg: &OracleConfig) -> Result<bool, SemanticsError> {
    Ok(program_violation(g, p, syms, cfg)?.is_none())
}

/// Satisfaction of the updated graph `g ⊕ d`.
pub fn sat_delta(g: &LRel, d: &EDelta, p: &Program, syms: &BTreeSet<Symbol>, cfg: &OracleConfig) -> Result<bool, SemanticsError> {
    sat_program(&apply_update(g, d), p, syms, cfg)
}

/// Closure by repeated composition until nothing changes.
fn naive_closure(edges: &EGraph) -> EGraph {
    let mut pairs: BTreeSet<(Node, Node)> = edges.iter().collect();
    loop {
        let mut next = pairs.clone();
        for &(a, b) in &pairs {
            for &(c, d) in &pairs {
                if b == c {
                    next.insert((a, d));
                }
            }
        }
        if next.len() == pairs.len() {
            return pairs.into_iter().collect();
        }
        pairs = next;
    }
}

/// Stratum-by-stratum model built by grounding enumeration.
pub fn brute_force_model(p: &Program, g_edb: &LRel, cfg: &OracleConfig) -> Result<LRel, SemanticsError> {
    let mut g = g_edb.clone();
    let mut pending: BTreeMap<&Symbol, BTreeSet<Symbol>> = p
        .clauses()
        .map(|(s, c)| (s, bare_symbols(&symbols_of_clause(c)).into_iter().filter(|d| p.is_intensional(d)).collect()))
        .collect();
    let mut done: BTreeSet<Symbol> = BTreeSet::new();
    while !pending.is_empty() {
        let next = pending.iter().find(|(_, deps)| deps.is_subset(&done)).map(|(s, _)| (*s).clone());
        let Some(s) = next else {
            return Err(SemanticsError::NotStratified);
        };
        pending.remove(&s);
        let c = p.clause(&s).unwrap();
        check_budget(&s, c.arity, cfg)?;
        let mut facts = EGraph::new();
        for_each_grounding(cfg.universe, c.arity, None, |eta| {
            if c.bodies.iter().any(|b| sat_body(&g, &instantiate(eta, b))) {
                facts.insert(constant(subst(eta, c.head.0)), constant(subst(eta, c.head.1)));
            }
            true
        });
        let closure = naive_closure(&facts);
        g.set(s.clone(), Tag::Single, facts);
        g.set(s.clone(), Tag::Plus, closure);
        done.insert(s);
    }
    Ok(g)
}
