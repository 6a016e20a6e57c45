//! Stratification order and well-formed slices.

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{bare_symbols, symbols_of_clause, Program, Symbol};

/// Intensional symbols that `s`'s clause reads.
fn view_deps(p: &Program, s: &Symbol) -> BTreeSet<Symbol> {
    p.clause(s)
        .map(|c| bare_symbols(&symbols_of_clause(c)).into_iter().filter(|d| p.is_intensional(d)).collect())
        .unwrap_or_default()
}

/// Topological order of the intensional symbols, ties broken by name.
/// On failure returns one dependency cycle.
pub fn stratify(p: &Program) -> Result<Vec<Symbol>, Vec<Symbol>> {
    let deps: BTreeMap<Symbol, BTreeSet<Symbol>> = p.intensional().map(|s| (s.clone(), view_deps(p, s))).collect();
    let mut waiting: BTreeMap<&Symbol, usize> = deps.iter().map(|(s, d)| (s, d.len())).collect();
    let mut readers: BTreeMap<&Symbol, Vec<&Symbol>> = BTreeMap::new();
    for (s, ds) in &deps {
        for d in ds {
            readers.entry(d).or_default().push(s);
        }
    }
    let mut ready: BTreeSet<&Symbol> = waiting.iter().filter(|(_, &n)| n == 0).map(|(s, _)| *s).collect();
    let mut order = Vec::with_capacity(deps.len());
    while let Some(s) = ready.pop_first() {
        order.push(s.clone());
        for r in readers.get(s).into_iter().flatten() {
            let n = waiting.get_mut(r).unwrap();
            *n -= 1;
            if *n == 0 {
                ready.insert(r);
            }
        }
    }
    if order.len() == deps.len() {
        return Ok(order);
    }
    let placed: BTreeSet<&Symbol> = order.iter().collect();
    Err(find_cycle(&deps, &placed))
}

/// Walks unplaced dependencies from the smallest unplaced symbol until a
/// symbol repeats. Every unplaced symbol has an unplaced dependency, so the
/// walk cannot get stuck.
fn find_cycle(deps: &BTreeMap<Symbol, BTreeSet<Symbol>>, placed: &BTreeSet<&Symbol>) -> Vec<Symbol> {
    let mut cur = deps.keys().find(|s| !placed.contains(s)).unwrap();
    let mut path: Vec<&Symbol> = Vec::new();
    loop {
        if let Some(i) = path.iter().position(|s| *s == cur) {
            return path[i..].iter().map(|s| (*s).clone()).collect();
        }
        path.push(cur);
        cur = deps[cur].iter().find(|d| !placed.contains(d)).unwrap();
    }
}

/// Every intensional symbol in `syms` only reads symbols in `syms`.
pub fn well_formed_slice(p: &Program, syms: &BTreeSet<Symbol>) -> bool {
    syms.iter()
        .filter_map(|s| p.clause(s))
        .all(|c| bare_symbols(&symbols_of_clause(c)).is_subset(syms))
}
