use std::collections::HashMap;

use super::parser::{PathExpr, SurfaceClause, SurfaceItem, SurfaceProgram, SurfaceTerm};
use super::{Literal, Symbol, Term};
use crate::node::NodeTable;

/// Core-form clause with a single conjunctive body, before completion.
///
/// Variables are numbered in first-occurrence order (head first, then body,
/// then fresh join variables); `var_names` maps indices back to source names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawClause {
    pub head_sym: Symbol,
    pub head: (Term, Term),
    pub body: Vec<Literal>,
    pub var_names: Vec<String>,
    pub line: usize,
}

struct Scope<'a> {
    names: Vec<String>,
    index: HashMap<String, u32>,
    nodes: &'a mut NodeTable,
}

impl Scope<'_> {
    fn term(&mut self, t: &SurfaceTerm) -> Term {
        match t {
            SurfaceTerm::Const(c) => Term::Const(self.nodes.intern(c)),
            SurfaceTerm::Var(v) => Term::Var(self.named(v)),
        }
    }

    fn named(&mut self, v: &str) -> u32 {
        if let Some(&i) = self.index.get(v) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(v.to_owned());
        self.index.insert(v.to_owned(), i);
        i
    }

    fn fresh(&mut self) -> Term {
        let i = self.names.len() as u32;
        // `#` cannot appear in source names, so fresh variables never capture.
        self.names.push(format!("#{i}"));
        Term::Var(i)
    }
}

/// Expands a path expression between `x` and `y` into disjuncts of literals.
fn expand(expr: &PathExpr, x: Term, y: Term, scope: &mut Scope<'_>) -> Vec<Vec<Literal>> {
    match expr {
        PathExpr::Sym(s) => vec![vec![Literal::rel(s.clone(), x, y)]],
        PathExpr::Inverse(e) => expand(e, y, x, scope),
        PathExpr::Plus(e) => closure_of(e, x, y),
        PathExpr::Star(e) => {
            let mut out = vec![vec![Literal::eq(x, y)]];
            out.extend(closure_of(e, x, y));
            out
        }
        PathExpr::Alt(arms) => arms.iter().flat_map(|a| expand(a, x, y, scope)).collect(),
        PathExpr::Seq(parts) => {
            let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
            let mut from = x;
            for (i, part) in parts.iter().enumerate() {
                let to = if i + 1 == parts.len() { y } else { scope.fresh() };
                let step = expand(part, from, to, scope);
                acc = cartesian(&acc, &step);
                from = to;
            }
            acc
        }
    }
}

/// Closure is only accepted on a symbol or an inverted symbol (the parser
/// enforces this); `(s-)+` is `s+` with swapped arguments.
fn closure_of(e: &PathExpr, x: Term, y: Term) -> Vec<Vec<Literal>> {
    match e {
        PathExpr::Sym(s) => vec![vec![Literal::plus(s.clone(), x, y)]],
        PathExpr::Inverse(inner) => closure_of(inner, y, x),
        other => unreachable!("closure over compound path {other:?}"),
    }
}

fn cartesian(left: &[Vec<Literal>], right: &[Vec<Literal>]) -> Vec<Vec<Literal>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in left {
        for r in right {
            let mut conj = l.clone();
            conj.extend(r.iter().cloned());
            out.push(conj);
        }
    }
    out
}

fn compile_clause(c: &SurfaceClause, nodes: &mut NodeTable) -> Vec<RawClause> {
    let mut scope = Scope { names: Vec::new(), index: HashMap::new(), nodes };
    let head = (scope.term(&c.args.0), scope.term(&c.args.1));
    // Bind source variables before any fresh join variable is allocated.
    for item in &c.body {
        let (a, b) = match item {
            SurfaceItem::Path { args, .. } => (&args.0, &args.1),
            SurfaceItem::Eq(a, b) => (a, b),
        };
        scope.term(a);
        scope.term(b);
    }
    let mut bodies: Vec<Vec<Literal>> = vec![Vec::new()];
    for item in &c.body {
        let step = match item {
            SurfaceItem::Path { expr, args } => {
                let (x, y) = (scope.term(&args.0), scope.term(&args.1));
                expand(expr, x, y, &mut scope)
            }
            SurfaceItem::Eq(a, b) => vec![vec![Literal::eq(scope.term(a), scope.term(b))]],
        };
        bodies = cartesian(&bodies, &step);
    }
    let names = scope.names;
    bodies
        .into_iter()
        .map(|body| RawClause { head_sym: c.head.clone(), head, body, var_names: names.clone(), line: c.line })
        .collect()
}

/// Rewrites surface operators into core literals. Each alternative produced
/// by `|` or `*` becomes its own raw clause with the same head.
pub fn compile_surface(sp: &SurfaceProgram, nodes: &mut NodeTable) -> Vec<RawClause> {
    sp.clauses.iter().flat_map(|c| compile_clause(c, nodes)).collect()
}
