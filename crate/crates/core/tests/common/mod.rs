//! Random small instances and independent reference computations shared by
//! the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdivm::graph::EGraph;
use rdivm::syntax::{compile_surface, normalize, parse_program};
use rdivm::{EDelta, LRel, Node, NodeTable, Program, Symbol, Tag, Universe};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sym(s: &str) -> Symbol {
    Symbol::new(s).unwrap()
}

/// Closure by repeated relational composition.
pub fn naive_closure(g: &EGraph) -> EGraph {
    let mut pairs: BTreeSet<(Node, Node)> = g.iter().collect();
    loop {
        let step: Vec<(Node, Node)> = pairs
            .iter()
            .flat_map(|&(a, b)| pairs.iter().filter(move |&&(c, _)| c == b).map(move |&(_, d)| (a, d)))
            .collect();
        let before = pairs.len();
        pairs.extend(step);
        if pairs.len() == before {
            return pairs.into_iter().collect();
        }
    }
}

/// Replaces every `Plus` entry with the closure of its `Single` entry.
pub fn with_closures(g: &LRel) -> LRel {
    let mut out = LRel::new();
    for ((s, t), e) in g.iter() {
        if *t == Tag::Single {
            out.set(s.clone(), Tag::Single, e.clone());
            out.set(s.clone(), Tag::Plus, naive_closure(e));
        }
    }
    out
}

pub fn singles(g: &LRel) -> LRel {
    let mut out = LRel::new();
    for ((s, t), e) in g.iter() {
        if *t == Tag::Single {
            out.set(s.clone(), Tag::Single, e.clone());
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Case {
    pub seed: u64,
    pub text: String,
    pub program: Program,
    pub nodes: NodeTable,
    /// EDB relations with closures.
    pub edb: LRel,
}

impl Case {
    pub fn universe(&self) -> Universe {
        self.nodes.universe()
    }

    pub fn edb_symbols(&self) -> Vec<Symbol> {
        self.program.edb_symbols().iter().cloned().collect()
    }
}

fn term(rng: &mut ChaCha8Rng, n: u32) -> String {
    if rng.gen_bool(0.1) {
        format!("n{}", rng.gen_range(0..n))
    } else {
        ["X", "Y", "Z", "W"][rng.gen_range(0..4)].to_string()
    }
}

fn literal(rng: &mut ChaCha8Rng, inputs: &[String], n: u32) -> String {
    let (a, b) = (term(rng, n), term(rng, n));
    match rng.gen_range(0..10) {
        0 => format!("{a} = {b}"),
        1 => {
            let (p, q) = (&inputs[rng.gen_range(0..inputs.len())], &inputs[rng.gen_range(0..inputs.len())]);
            let op = ["|", "."][rng.gen_range(0..2)];
            format!("({p} {op} {q})({a},{b})")
        }
        2 => format!("{}*({a},{b})", inputs[rng.gen_range(0..inputs.len())]),
        3 | 4 => format!("{}+({a},{b})", inputs[rng.gen_range(0..inputs.len())]),
        _ => format!("{}({a},{b})", inputs[rng.gen_range(0..inputs.len())]),
    }
}

fn head(rng: &mut ChaCha8Rng, v: &str, n: u32) -> String {
    match rng.gen_range(0..10) {
        0 => format!("{v}(X,X)"),
        1 => format!("{v}(n{},Y)", rng.gen_range(0..n)),
        _ => format!("{v}(X,Y)"),
    }
}

/// Random safe stratified program over `e0..` and views `v0..`; each view
/// only reads extensional symbols and earlier views.
pub fn random_program(rng: &mut ChaCha8Rng, n: u32, edb: u32, views: u32, max_lits: usize) -> (String, Program, NodeTable) {
    let edb_names: Vec<String> = (0..edb).map(|i| format!("e{i}")).collect();
    loop {
        let mut text = String::new();
        let mut inputs = edb_names.clone();
        for i in 0..views {
            let v = format!("v{i}");
            for _ in 0..rng.gen_range(1..=2) {
                let lits: Vec<String> = (0..rng.gen_range(1..=max_lits)).map(|_| literal(rng, &inputs, n)).collect();
                text += &format!("{} :- {}.\n", head(rng, &v, n), lits.join(", "));
            }
            inputs.push(v);
        }
        let mut nodes = NodeTable::numbered("n", n);
        let raw = compile_surface(&parse_program(&text).expect("generated text parses"), &mut nodes);
        if let Ok(p) = normalize(&raw) {
            // Views that read no relation at all are legal but uninteresting.
            if p.intensional().count() == views as usize && nodes.len() == n as usize {
                return (text, p, nodes);
            }
        }
    }
}

pub fn random_edges(rng: &mut ChaCha8Rng, n: u32, p: f64) -> EGraph {
    let mut g = EGraph::new();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(p) {
                g.insert(Node(a), Node(b));
            }
        }
    }
    g
}

/// Up to 5 nodes, 4 extensional symbols, 3 views and 3 literals per body.
pub fn random_case(seed: u64) -> Case {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=5);
    let edb = rng.gen_range(1..=4);
    let views = rng.gen_range(1..=3);
    let (text, program, nodes) = random_program(&mut rng, n, edb, views, 3);
    let mut single = LRel::new();
    for s in program.edb_symbols() {
        single.set(s.clone(), Tag::Single, random_edges(&mut rng, n, 0.3));
    }
    Case { seed, text, program, nodes, edb: with_closures(&single) }
}

/// Random additions to the extensional `Single` entries.
pub fn random_additions(rng: &mut ChaCha8Rng, case: &Case) -> EDelta {
    let n = case.universe().0;
    let mut add = LRel::new();
    for s in case.program.edb_symbols() {
        add.set(s.clone(), Tag::Single, random_edges(rng, n, 0.15));
    }
    EDelta::additions(add)
}

/// Random deletions of existing extensional edges (at least one when any
/// exist) plus random additions of absent ones.
pub fn random_mixed(rng: &mut ChaCha8Rng, case: &Case) -> EDelta {
    let n = case.universe().0;
    let mut add = LRel::new();
    let mut del = LRel::new();
    for s in case.program.edb_symbols() {
        let current = case.edb.get(s, Tag::Single);
        del.set(s.clone(), Tag::Single, current.iter().filter(|_| rng.gen_bool(0.35)).collect());
        add.set(s.clone(), Tag::Single, random_edges(rng, n, 0.1).difference(current));
    }
    if del.is_empty() {
        if let Some((s, e)) = case.edb.iter().find(|((_, t), e)| *t == Tag::Single && !e.is_empty()) {
            let (a, b) = e.iter().next().unwrap();
            del.insert(&s.0, Tag::Single, a, b);
            add.remove(&s.0, Tag::Single, a, b);
        }
    }
    EDelta::new(add, del).expect("deletions and additions are disjoint")
}
