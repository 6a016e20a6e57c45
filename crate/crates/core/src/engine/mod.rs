//! Materialization and incremental maintenance of views.
//!
//! [`Engine::fwd_program`] walks the intensional symbols in stratification
//! order. Each step rewrites one view through either the base operator
//! (full re-evaluation of the clause over the updated graph) or the delta
//! operator (masked matching against the update's additions), then brings
//! the view's closure entry up to date.

mod mask;
mod strata;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::closure::{compute_closures_with, ClosureOptions};
use crate::exec::Exec;
use crate::graph::{apply_update, lrel_diff, wf_witness_at, Applied, EDelta, EGraph, Key, LRel};
use crate::matching::{canonicalize, fold_literals, ground_head, match_atom_into, match_body, MatchError, Substitution};
use crate::node::{Node, Universe};
use crate::semantics::{program_violation, OracleConfig, SemanticsError, DEFAULT_BUDGET};
use crate::syntax::{bare_symbols, check_safety, symbols_of_clause, Atom, Clause, Literal, Program, Symbol, SyntaxError, Tag};

pub use mask::{body_mask, body_mask_with, MaskOrder, MaskTag, MaskedBody};
pub use strata::{stratify, well_formed_slice};

/// Checks run between steps when [`EngineConfig::debug_hypotheses`] is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hypothesis {
    /// The input graph is a model of the clauses of supported symbols.
    H1,
    /// Processed symbols form a well-formed slice.
    H2,
    /// The working delta only mentions processed keys.
    H3,
    /// Processed and pending symbols stratify the program.
    H4,
    /// The updated graph is a model of the clauses of processed symbols.
    H5,
    Disjointness,
    WellFormedGraph,
    StrataContainment,
    DeltaContainment,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
            Hypothesis::H4 => "H4",
            Hypothesis::H5 => "H5",
            Hypothesis::Disjointness => "delta-disjointness",
            Hypothesis::WellFormedGraph => "wf-graph",
            Hypothesis::StrataContainment => "strata-containment",
            Hypothesis::DeltaContainment => "delta-containment",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("program is not stratified: dependency cycle {}", fmt_cycle(.0))]
    Cycle(Vec<Symbol>),
    #[error("update touches intensional symbol `{0}`")]
    IntensionalUpdate(Symbol),
    #[error("node {node} is outside the universe of {size} nodes")]
    OutsideUniverse { node: Node, size: u32 },
    #[error("{id} violated before processing {at}: {detail}")]
    Hypothesis { id: Hypothesis, at: String, detail: String },
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

impl EngineError {
    /// Failures of the engine's own invariants rather than of its inputs.
    pub fn is_internal(&self) -> bool {
        matches!(self, EngineError::Hypothesis { .. } | EngineError::Match(_))
    }
}

fn fmt_cycle(c: &[Symbol]) -> String {
    let mut names: Vec<&str> = c.iter().map(Symbol::as_str).collect();
    if let Some(first) = names.first().copied() {
        names.push(first);
    }
    names.join(" -> ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub mask_order: MaskOrder,
    pub closure: ClosureOptions,
    pub debug_hypotheses: bool,
    /// Grounding budget for the satisfaction checks in debug mode.
    pub enum_budget: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mask_order: MaskOrder::default(),
            closure: ClosureOptions::default(),
            debug_hypotheses: false,
            enum_budget: DEFAULT_BUDGET,
        }
    }
}

impl EngineConfig {
    pub fn exec(&self) -> Exec {
        self.closure.exec
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.closure.exec = exec;
        self
    }

    pub fn debug(mut self) -> Self {
        self.debug_hypotheses = true;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub base_calls: usize,
    pub delta_calls: usize,
    pub iterations: usize,
    /// Debug checks that ran; a failing check aborts instead of counting.
    pub checks: usize,
}

impl std::ops::AddAssign for EngineStats {
    fn add_assign(&mut self, other: EngineStats) {
        self.base_calls += other.base_calls;
        self.delta_calls += other.delta_calls;
        self.iterations += other.iterations;
        self.checks += other.checks;
    }
}

/// Incremental matching of one literal: `Base` reads `g`, `Delta` reads the
/// additions of `d`, `Full` reads both. Equalities ignore the tag.
pub fn match_delta_atom(g: &LRel, d: &EDelta, m: MaskTag, lit: &Literal, s: &Substitution, universe: Universe) -> Vec<Substitution> {
    let mut out = Vec::new();
    match_delta_into(g, d, m, lit, s, universe, &mut out);
    canonicalize(out)
}

fn match_delta_into(g: &LRel, d: &EDelta, m: MaskTag, lit: &Literal, s: &Substitution, universe: Universe, out: &mut Vec<Substitution>) {
    match &lit.atom {
        Atom::Rel(sym, ..) => {
            if m != MaskTag::Delta {
                match_atom_into(g.get(sym, lit.tag), &lit.atom, s, universe, out);
            }
            if m != MaskTag::Base {
                match_atom_into(d.add().get(sym, lit.tag), &lit.atom, s, universe, out);
            }
        }
        Atom::Eq(..) => match_atom_into(EGraph::empty_ref(), &lit.atom, s, universe, out),
    }
}

/// Left-to-right fold of [`match_delta_atom`] over a masked body.
pub fn match_delta_body(g: &LRel, d: &EDelta, mb: &MaskedBody, universe: Universe) -> Vec<Substitution> {
    fold_literals(&mb.lits, universe, |(m, lit), s, univ, out| match_delta_into(g, d, *m, lit, s, univ, out))
}

fn heads(subs: &[Substitution], c: &Clause) -> Result<Vec<(Node, Node)>, MatchError> {
    subs.iter().map(|s| ground_head(s, c.head)).collect()
}

fn edges_of(parts: Vec<Result<Vec<(Node, Node)>, MatchError>>) -> Result<EGraph, MatchError> {
    let mut out = EGraph::new();
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Keys `(s, Single)` and `(s, Plus)`.
pub fn both_tags(s: &Symbol) -> [Key; 2] {
    [(s.clone(), Tag::Single), (s.clone(), Tag::Plus)]
}

/// Evaluator for one program over a fixed node universe.
#[derive(Debug, Clone)]
pub struct Engine<'p> {
    program: &'p Program,
    universe: Universe,
    order: Vec<Symbol>,
    config: EngineConfig,
    stats: EngineStats,
}

impl<'p> Engine<'p> {
    /// Validates safety and stratification.
    pub fn new(program: &'p Program, universe: Universe, config: EngineConfig) -> Result<Self, EngineError> {
        check_safety(program)?;
        let order = stratify(program).map_err(EngineError::Cycle)?;
        Ok(Engine { program, universe, order, config, stats: EngineStats::default() })
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Stratification order of the intensional symbols.
    pub fn order(&self) -> &[Symbol] {
        &self.order
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = EngineStats::default();
    }

    /// Rewrites `s` to exactly the clause's consequences over `g ⊕ d`.
    pub fn fwd_or_clause_base(&self, g: &LRel, d: EDelta, s: &Symbol, c: &Clause) -> Result<EDelta, MatchError> {
        let view = Applied::new(g, &d);
        let universe = self.universe;
        let target = edges_of(self.config.exec().map(&c.bodies, |b| heads(&match_body(&view, b, universe), c)))?;
        let current = view.get(s, Tag::Single).to_egraph();
        let (plus, minus) = lrel_diff(&current, &target);
        Ok(d.modify(s, Tag::Single, &plus, &minus))
    }

    /// Head facts per body and mask row, before removing facts already in
    /// the view. Bodies without relational literals yield one row matched
    /// against `g ⊕ d` in full.
    pub fn delta_rows(&self, g: &LRel, d: &EDelta, c: &Clause) -> Result<Vec<Vec<EGraph>>, MatchError> {
        let rows: Vec<(usize, Option<MaskedBody>)> = c
            .bodies
            .iter()
            .enumerate()
            .flat_map(|(i, b)| {
                let masks = body_mask_with(b, self.config.mask_order);
                if masks.is_empty() {
                    vec![(i, None)]
                } else {
                    masks.into_iter().map(|m| (i, Some(m))).collect()
                }
            })
            .collect();
        let universe = self.universe;
        let results = self.config.exec().map(&rows, |(i, mb)| {
            let subs = match mb {
                Some(mb) => match_delta_body(g, d, mb, universe),
                None => match_body(&Applied::new(g, d), &c.bodies[*i], universe),
            };
            Ok::<_, MatchError>(heads(&subs, c)?.into_iter().collect::<EGraph>())
        });
        let mut out: Vec<Vec<EGraph>> = vec![Vec::new(); c.bodies.len()];
        for ((i, _), r) in rows.iter().zip(results) {
            out[*i].push(r?);
        }
        Ok(out)
    }

    /// Adds the clause's new consequences; never deletes.
    pub fn fwd_or_clause_delta(&self, g: &LRel, d: EDelta, s: &Symbol, c: &Clause) -> Result<EDelta, MatchError> {
        let mut t_inc = EGraph::new();
        for row in self.delta_rows(g, &d, c)?.into_iter().flatten() {
            t_inc.extend(row.iter());
        }
        let current = Applied::new(g, &d).get(s, Tag::Single);
        let fresh: EGraph = t_inc.iter().filter(|&(a, b)| !crate::graph::EdgeLookup::contains(&current, a, b)).collect();
        Ok(d.modify(s, Tag::Single, &fresh, &EGraph::new()))
    }

    /// Delta operator when `s` is supported and no body key has deletions,
    /// base operator otherwise.
    pub fn fwd_or_clause(&mut self, g: &LRel, support: &BTreeSet<Symbol>, d: EDelta, s: &Symbol, c: &Clause) -> Result<EDelta, MatchError> {
        let deletes_body = symbols_of_clause(c).iter().any(|k| !d.del().get_key(k).is_empty());
        if !support.contains(s) || deletes_body {
            self.stats.base_calls += 1;
            self.fwd_or_clause_base(g, d, s, c)
        } else {
            self.stats.delta_calls += 1;
            self.fwd_or_clause_delta(g, d, s, c)
        }
    }

    /// Processes `todo` in order, extending `d` with each view's update and
    /// closure adjustment.
    pub fn fwd_program(
        &mut self,
        g: &LRel,
        support: &BTreeSet<Symbol>,
        mut d: EDelta,
        mut processed: BTreeSet<Key>,
        todo: &[Symbol],
    ) -> Result<EDelta, EngineError> {
        let debug = self.config.debug_hypotheses;
        if debug {
            let at = todo.first().map_or("end", Symbol::as_str);
            self.check_h1(g, support, at)?;
            self.check_h4(&processed, todo, at)?;
        }
        for s in todo {
            let c = self.program.clause(s).ok_or_else(|| EngineError::Hypothesis {
                id: Hypothesis::H4,
                at: s.to_string(),
                detail: "pending symbol has no clause".into(),
            })?;
            if debug {
                self.check_iteration(g, &d, &processed, s, c)?;
            }
            let before = d.keys();
            let d1 = self.fwd_or_clause(g, support, d, s, c)?;
            if debug {
                self.check_step(&d1, &before, &[(s.clone(), Tag::Single)], s)?;
            }
            let d2 = compute_closures_with(g, d1, s, self.config.closure);
            if debug {
                self.check_step(&d2, &before, &both_tags(s), s)?;
                self.check_wf(g, &d2, std::slice::from_ref(s), s.as_str())?;
            }
            processed.extend(both_tags(s));
            d = d2;
            self.stats.iterations += 1;
        }
        if debug {
            self.check_h5(g, &d, &processed, "end")?;
            let syms: Vec<Symbol> = bare_symbols(&processed).into_iter().collect();
            self.check_wf(g, &d, &syms, "end")?;
        }
        Ok(d)
    }

    /// Keys of every non-intensional symbol in `g` or the program.
    fn extensional_keys(&self, g: &LRel, extra: &BTreeSet<Key>) -> BTreeSet<Key> {
        g.symbols()
            .iter()
            .chain(self.program.edb_symbols())
            .chain(extra.iter().map(|(s, _)| s))
            .filter(|s| !self.program.is_intensional(s))
            .flat_map(both_tags)
            .collect()
    }

    fn check_universe(&self, g: &LRel) -> Result<(), EngineError> {
        let bound = g.node_bound();
        if bound > self.universe.0 {
            return Err(EngineError::OutsideUniverse { node: Node(bound - 1), size: self.universe.0 });
        }
        Ok(())
    }

    /// All views computed from scratch. `g` holds the EDB with closures.
    pub fn materialize(&mut self, g: &LRel) -> Result<LRel, EngineError> {
        self.check_universe(g)?;
        let support = self.program.edb_symbols().clone();
        let processed = self.extensional_keys(g, &BTreeSet::new());
        let order = self.order.clone();
        let d = self.fwd_program(g, &support, EDelta::empty(), processed, &order)?;
        Ok(apply_update(g, &d))
    }

    /// Update to the materialized `g` that accounts for the EDB update `d`.
    /// Views outside `support` are recomputed in full.
    pub fn maintain(&mut self, g: &LRel, support: &BTreeSet<Symbol>, d: EDelta) -> Result<EDelta, EngineError> {
        let keys = d.keys();
        if let Some((s, _)) = keys.iter().find(|(s, _)| self.program.is_intensional(s)) {
            return Err(EngineError::IntensionalUpdate(s.clone()));
        }
        self.check_universe(g)?;
        self.check_universe(d.add())?;
        let mut d = d;
        for s in bare_symbols(&keys) {
            d = compute_closures_with(g, d, &s, self.config.closure);
        }
        let processed = self.extensional_keys(g, &keys);
        let order = self.order.clone();
        self.fwd_program(g, support, d, processed, &order)
    }

    fn oracle(&self) -> OracleConfig {
        OracleConfig::new(self.universe).with_budget(self.config.enum_budget).with_exec(self.config.exec())
    }

    fn violation(&mut self, ok: bool, id: Hypothesis, at: &str, detail: impl FnOnce() -> String) -> Result<(), EngineError> {
        self.stats.checks += 1;
        if ok {
            Ok(())
        } else {
            Err(EngineError::Hypothesis { id, at: at.to_string(), detail: detail() })
        }
    }

    fn check_h1(&mut self, g: &LRel, support: &BTreeSet<Symbol>, at: &str) -> Result<(), EngineError> {
        let cex = program_violation(g, self.program, support, &self.oracle())?;
        self.violation(cex.is_none(), Hypothesis::H1, at, || cex.map(|c| c.to_string()).unwrap_or_default())
    }

    fn check_h4(&mut self, processed: &BTreeSet<Key>, todo: &[Symbol], at: &str) -> Result<(), EngineError> {
        let done = bare_symbols(processed);
        let mut seen = done.clone();
        let mut ok = true;
        for s in todo {
            ok &= !seen.contains(s);
            ok &= self.program.clause(s).is_some_and(|c| bare_symbols(&symbols_of_clause(c)).is_subset(&seen));
            seen.insert(s.clone());
        }
        let covered = self.program.intensional().all(|s| seen.contains(s));
        self.violation(ok && covered, Hypothesis::H4, at, || {
            format!("processed {:?} and pending {:?} do not stratify the program", names(&done), names(todo))
        })
    }

    fn check_h5(&mut self, g: &LRel, d: &EDelta, processed: &BTreeSet<Key>, at: &str) -> Result<(), EngineError> {
        let syms = bare_symbols(processed);
        let cex = program_violation(&apply_update(g, d), self.program, &syms, &self.oracle())?;
        self.violation(cex.is_none(), Hypothesis::H5, at, || cex.map(|c| c.to_string()).unwrap_or_default())
    }

    fn check_wf(&mut self, g: &LRel, d: &EDelta, syms: &[Symbol], at: &str) -> Result<(), EngineError> {
        let applied = apply_update(g, d);
        let bad = syms.iter().find_map(|s| wf_witness_at(&applied, s));
        self.violation(bad.is_none(), Hypothesis::WellFormedGraph, at, || bad.map(|b| b.to_string()).unwrap_or_default())
    }

    fn check_iteration(&mut self, g: &LRel, d: &EDelta, processed: &BTreeSet<Key>, s: &Symbol, c: &Clause) -> Result<(), EngineError> {
        let done = bare_symbols(processed);
        let at = s.as_str();
        self.violation(well_formed_slice(self.program, &done), Hypothesis::H2, at, || {
            format!("{:?} is not closed under clause dependencies", names(&done))
        })?;
        let keys = d.keys();
        self.violation(keys.is_subset(processed), Hypothesis::H3, at, || {
            format!("delta keys {:?} exceed the processed keys", keys.difference(processed).collect::<Vec<_>>())
        })?;
        let body = symbols_of_clause(c);
        self.violation(!done.contains(s) && body.is_subset(processed), Hypothesis::StrataContainment, at, || {
            format!("clause reads unprocessed keys {:?}", body.difference(processed).collect::<Vec<_>>())
        })?;
        self.check_h5(g, d, processed, at)?;
        let syms: Vec<Symbol> = done.into_iter().collect();
        self.check_wf(g, d, &syms, at)
    }

    fn check_step(&mut self, d: &EDelta, before: &BTreeSet<Key>, own: &[Key], s: &Symbol) -> Result<(), EngineError> {
        self.violation(d.is_disjoint(), Hypothesis::Disjointness, s.as_str(), || "additions and deletions overlap".into())?;
        let keys = d.keys();
        let ok = keys.iter().all(|k| before.contains(k) || own.contains(k));
        self.violation(ok, Hypothesis::DeltaContainment, s.as_str(), || format!("delta grew keys {keys:?}"))
    }
}

fn names<'a>(syms: impl IntoIterator<Item = &'a Symbol>) -> Vec<&'a str> {
    syms.into_iter().map(Symbol::as_str).collect()
}

pub fn materialize(p: &Program, g: &LRel, universe: Universe) -> Result<LRel, EngineError> {
    Engine::new(p, universe, EngineConfig::default())?.materialize(g)
}

pub fn maintain(p: &Program, g: &LRel, support: &BTreeSet<Symbol>, d: EDelta, universe: Universe) -> Result<EDelta, EngineError> {
    Engine::new(p, universe, EngineConfig::default())?.maintain(g, support, d)
}

#[cfg(test)]
mod tests;
