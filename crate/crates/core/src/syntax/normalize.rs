use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::compile::RawClause;
use super::{check_clause_safety, CBody, Clause, Literal, Program, Symbol, SyntaxError, Term};

/// Rewrites one raw clause onto the canonical head `(V0, V1)`.
///
/// Head constants and repeated head variables become equality literals
/// prepended to the body; remaining variables are renumbered from 2 in
/// first-occurrence order.
fn canonicalize(raw: &RawClause) -> CBody {
    let mut map: HashMap<u32, u32> = HashMap::new();
    let mut lits = Vec::new();
    for (slot, t) in [(0u32, raw.head.0), (1u32, raw.head.1)] {
        match t {
            Term::Const(c) => lits.push(Literal::eq(Term::Const(c), Term::Var(slot))),
            Term::Var(v) => match map.get(&v) {
                Some(&prev) => lits.push(Literal::eq(Term::Var(prev), Term::Var(slot))),
                None => {
                    map.insert(v, slot);
                }
            },
        }
    }
    let mut next = 2u32;
    for lit in &raw.body {
        let atom = lit.atom.map_terms(|t| match t {
            Term::Var(v) => Term::Var(*map.entry(v).or_insert_with(|| {
                next += 1;
                next - 1
            })),
            c => c,
        });
        lits.push(Literal { tag: lit.tag, atom });
    }
    CBody::new(lits)
}

/// Groups raw clauses by head symbol into completed, safety-checked clauses.
/// Body order follows source order.
pub fn normalize(raw: &[RawClause]) -> Result<Program, SyntaxError> {
    normalize_with_edb(raw, &BTreeSet::new())
}

/// As [`normalize`], rejecting clause heads that are declared as input
/// relations.
pub fn normalize_with_edb(raw: &[RawClause], declared_edb: &BTreeSet<Symbol>) -> Result<Program, SyntaxError> {
    let mut grouped: BTreeMap<Symbol, Vec<CBody>> = BTreeMap::new();
    for r in raw {
        if declared_edb.contains(&r.head_sym) {
            return Err(SyntaxError::Redeclared(r.head_sym.clone()));
        }
        grouped.entry(r.head_sym.clone()).or_default().push(canonicalize(r));
    }
    let mut clauses = BTreeMap::new();
    for (s, bodies) in grouped {
        let clause = Clause::new(Clause::canonical_head(), bodies);
        check_clause_safety(&s, &clause)?;
        clauses.insert(s, clause);
    }
    Ok(Program::new(clauses))
}

/// Flattens a program back into one raw clause per disjunct.
pub fn denormalize(p: &Program) -> Vec<RawClause> {
    p.clauses()
        .flat_map(|(s, c)| {
            c.bodies.iter().map(move |b| RawClause {
                head_sym: s.clone(),
                head: c.head,
                body: b.lits.clone(),
                var_names: (0..c.arity).map(|i| format!("V{i}")).collect(),
                line: 0,
            })
        })
        .collect()
}
