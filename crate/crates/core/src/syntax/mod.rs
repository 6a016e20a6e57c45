//! Regular Datalog syntax: surface parsing, compilation of path operators
//! into core literals, clause completion, and safety checking.
//!
//! Every atom is binary. Recursion exists only as the closure tag on a
//! literal: `p+(X,Y)` is matched against the transitive closure of `p`.
//! After [`normalize`], a [`Program`] holds exactly one [`Clause`] per
//! intensional symbol, whose head is the canonical pair `(V0, V1)` and whose
//! body is a disjunction of conjunctive bodies.

mod compile;
mod normalize;
mod parser;
mod pretty;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::node::Node;

pub use compile::{compile_surface, RawClause};
pub use normalize::{denormalize, normalize, normalize_with_edb};
pub use parser::{parse_program, PathExpr, SurfaceClause, SurfaceItem, SurfaceProgram, SurfaceTerm};
pub use pretty::ProgramDisplay;

/// Relation label. Cheap to clone; ordered by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Result<Self, SyntaxError> {
        if is_identifier(name) {
            Ok(Symbol(Arc::from(name)))
        } else {
            Err(SyntaxError::InvalidSymbol(name.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Closure tag carried by literals and relation keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Single,
    Plus,
}

impl Tag {
    pub const ALL: [Tag; 2] = [Tag::Single, Tag::Plus];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Node),
    Var(u32),
}

impl Term {
    pub fn var(self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Rel(Symbol, Term, Term),
    Eq(Term, Term),
}

impl Atom {
    pub fn terms(&self) -> (Term, Term) {
        match self {
            Atom::Rel(_, a, b) | Atom::Eq(a, b) => (*a, *b),
        }
    }

    pub fn symbol(&self) -> Option<&Symbol> {
        match self {
            Atom::Rel(s, _, _) => Some(s),
            Atom::Eq(..) => None,
        }
    }

    pub(crate) fn map_terms(&self, mut f: impl FnMut(Term) -> Term) -> Atom {
        match self {
            Atom::Rel(s, a, b) => Atom::Rel(s.clone(), f(*a), f(*b)),
            Atom::Eq(a, b) => Atom::Eq(f(*a), f(*b)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub tag: Tag,
    pub atom: Atom,
}

impl Literal {
    pub fn rel(sym: Symbol, a: Term, b: Term) -> Self {
        Literal { tag: Tag::Single, atom: Atom::Rel(sym, a, b) }
    }

    pub fn plus(sym: Symbol, a: Term, b: Term) -> Self {
        Literal { tag: Tag::Plus, atom: Atom::Rel(sym, a, b) }
    }

    pub fn eq(a: Term, b: Term) -> Self {
        Literal { tag: Tag::Single, atom: Atom::Eq(a, b) }
    }

    pub fn is_rel(&self) -> bool {
        matches!(self.atom, Atom::Rel(..))
    }

    /// `(symbol, tag)` key for relational literals.
    pub fn key(&self) -> Option<(Symbol, Tag)> {
        self.atom.symbol().map(|s| (s.clone(), self.tag))
    }

    pub fn vars(&self) -> impl Iterator<Item = u32> {
        let (a, b) = self.atom.terms();
        a.var().into_iter().chain(b.var())
    }
}

/// Conjunctive body.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CBody {
    pub lits: Vec<Literal>,
}

impl CBody {
    pub fn new(lits: Vec<Literal>) -> Self {
        CBody { lits }
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        self.lits.iter().flat_map(Literal::vars).collect()
    }

    /// One past the largest variable index used, or 0.
    pub fn var_bound(&self) -> u32 {
        self.lits.iter().flat_map(Literal::vars).map(|v| v + 1).max().unwrap_or(0)
    }

    pub fn rel_count(&self) -> usize {
        self.lits.iter().filter(|l| l.is_rel()).count()
    }
}

/// Completed clause: `head <- bodies[0] | bodies[1] | ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: (Term, Term),
    pub bodies: Vec<CBody>,
    pub arity: u32,
}

impl Clause {
    /// Builds a clause, computing the arity from the terms used.
    pub fn new(head: (Term, Term), bodies: Vec<CBody>) -> Self {
        let head_bound = [head.0, head.1].iter().filter_map(|t| t.var()).map(|v| v + 1).max().unwrap_or(0);
        let arity = bodies.iter().map(CBody::var_bound).fold(head_bound, u32::max);
        Clause { head, bodies, arity }
    }

    pub fn canonical_head() -> (Term, Term) {
        (Term::Var(0), Term::Var(1))
    }
}

/// Normalized program: one clause per intensional symbol.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    clauses: BTreeMap<Symbol, Clause>,
    edb: BTreeSet<Symbol>,
}

impl Program {
    /// Builds a program; every body symbol without a clause becomes EDB.
    pub fn new(clauses: BTreeMap<Symbol, Clause>) -> Self {
        let edb = clauses
            .values()
            .flat_map(|c| bare_symbols(&symbols_of_clause(c)))
            .filter(|s| !clauses.contains_key(s))
            .collect();
        Program { clauses, edb }
    }

    pub fn clause(&self, s: &Symbol) -> Option<&Clause> {
        self.clauses.get(s)
    }

    pub fn clauses(&self) -> impl Iterator<Item = (&Symbol, &Clause)> {
        self.clauses.iter()
    }

    pub fn intensional(&self) -> impl Iterator<Item = &Symbol> {
        self.clauses.keys()
    }

    pub fn is_intensional(&self, s: &Symbol) -> bool {
        self.clauses.contains_key(s)
    }

    pub fn edb_symbols(&self) -> &BTreeSet<Symbol> {
        &self.edb
    }

    /// Intensional and EDB symbols together.
    pub fn all_symbols(&self) -> BTreeSet<Symbol> {
        self.clauses.keys().chain(self.edb.iter()).cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Symbols whose clause contains a variable-variable equality, whose
    /// consequences depend on the size of the node universe.
    pub fn universe_sensitive(&self) -> BTreeSet<Symbol> {
        self.clauses
            .iter()
            .filter(|(_, c)| {
                c.bodies.iter().flat_map(|b| &b.lits).any(|l| matches!(l.atom, Atom::Eq(Term::Var(_), Term::Var(_))))
            })
            .map(|(s, _)| s.clone())
            .collect()
    }
}

/// `(symbol, tag)` pairs of the relational literals in a body.
pub fn symbols_of(body: &CBody) -> BTreeSet<(Symbol, Tag)> {
    body.lits.iter().filter_map(Literal::key).collect()
}

pub fn symbols_of_clause(c: &Clause) -> BTreeSet<(Symbol, Tag)> {
    c.bodies.iter().flat_map(symbols_of).collect()
}

/// Union of [`symbols_of_clause`] over the given program symbols.
pub fn symbols_of_slice<'a>(p: &Program, syms: impl IntoIterator<Item = &'a Symbol>) -> BTreeSet<(Symbol, Tag)> {
    syms.into_iter().filter_map(|s| p.clause(s)).flat_map(symbols_of_clause).collect()
}

pub fn bare_symbols(keys: &BTreeSet<(Symbol, Tag)>) -> BTreeSet<Symbol> {
    keys.iter().map(|(s, _)| s.clone()).collect()
}

/// Per-disjunct safety: both head variables occur in every disjunct.
pub fn check_safety(p: &Program) -> Result<(), SyntaxError> {
    for (s, c) in p.clauses() {
        check_clause_safety(s, c)?;
    }
    Ok(())
}

pub(crate) fn check_clause_safety(s: &Symbol, c: &Clause) -> Result<(), SyntaxError> {
    for (i, body) in c.bodies.iter().enumerate() {
        let vars = body.vars();
        for t in [c.head.0, c.head.1] {
            if let Term::Var(v) = t {
                if !vars.contains(&v) {
                    return Err(SyntaxError::Unsafe { symbol: s.clone(), disjunct: i, variable: v });
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("invalid symbol name `{0}`")]
    InvalidSymbol(String),
    #[error("unsafe clause for `{symbol}`: V{variable} unbound in disjunct {disjunct}")]
    Unsafe { symbol: Symbol, disjunct: usize, variable: u32 },
    #[error("symbol redeclared: `{0}` is both defined by clauses and given as input")]
    Redeclared(Symbol),
    #[error("clause head must be a relational atom")]
    BadHead,
}
