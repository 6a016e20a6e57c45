use super::*;
use crate::closure::close_all;
use crate::node::NodeTable;
use crate::semantics::sat_program;
use crate::syntax::{compile_surface, normalize, parse_program};

fn sym(s: &str) -> Symbol {
    Symbol::new(s).unwrap()
}

fn program(text: &str, nodes: &mut NodeTable) -> Program {
    normalize(&compile_surface(&parse_program(text).unwrap(), nodes)).unwrap()
}

fn eg(edges: &[(u32, u32)]) -> EGraph {
    edges.iter().map(|&(a, b)| (Node(a), Node(b))).collect()
}

fn edb(rels: &[(&str, &[(u32, u32)])]) -> LRel {
    let mut g = LRel::new();
    for (s, edges) in rels {
        g.set(sym(s), Tag::Single, eg(edges));
    }
    close_all(&g, Exec::Sequential)
}

const DETECTABLE: &str = "detectable(X,Y) :- suspect(X,Y), monitors(Z,X), monitors(Z,Y).";

fn example2() -> (Program, LRel, Universe) {
    let mut nodes = NodeTable::numbered("V", 7);
    let p = program(DETECTABLE, &mut nodes);
    let g = edb(&[
        ("monitors", &[(1, 0), (1, 6), (4, 0), (4, 3)]),
        ("suspect", &[(0, 2), (2, 3), (6, 0), (3, 0), (5, 6), (0, 5)]),
    ]);
    (p, g, nodes.universe())
}

fn example2_update() -> EDelta {
    let mut add = LRel::new();
    add.set(sym("monitors"), Tag::Single, eg(&[(1, 2), (4, 5)]));
    add.set(sym("suspect"), Tag::Single, eg(&[(2, 0)]));
    EDelta::additions(add)
}

#[test]
fn example2_materialize_and_maintain() {
    let (p, g, universe) = example2();
    let mut engine = Engine::new(&p, universe, EngineConfig::default().debug()).unwrap();
    let m = engine.materialize(&g).unwrap();
    assert_eq!(m.get(&sym("detectable"), Tag::Single), &eg(&[(6, 0), (3, 0)]));

    let support = p.all_symbols();
    engine.reset_stats();
    let out = engine.maintain(&m, &support, example2_update()).unwrap();
    assert_eq!(out.add().get(&sym("detectable"), Tag::Single), &eg(&[(0, 2), (2, 0), (0, 5)]));
    assert!(!out.has_deletions());
    assert_eq!(engine.stats().delta_calls, 1);
    assert_eq!(engine.stats().base_calls, 0);
    assert!(engine.stats().checks > 0);

    let updated_edb = apply_update(&g, &out).restrict(p.edb_symbols());
    assert_eq!(apply_update(&m, &out), materialize(&p, &updated_edb, universe).unwrap());
}

#[test]
fn example2_delta_rows() {
    let (p, g, universe) = example2();
    let m = materialize(&p, &g, universe).unwrap();
    let c = p.clause(&sym("detectable")).unwrap();
    let config = EngineConfig { mask_order: MaskOrder::BaseAfterDelta, ..EngineConfig::default() };
    let engine = Engine::new(&p, universe, config).unwrap();
    let d = example2_update();
    let rows = engine.delta_rows(&m, &d, c).unwrap();
    assert_eq!(rows, vec![vec![eg(&[]), eg(&[(2, 0)]), eg(&[(0, 2), (0, 5)])]]);

    let default_rows = Engine::new(&p, universe, EngineConfig::default()).unwrap().delta_rows(&m, &d, c).unwrap();
    let union = |rows: &Vec<Vec<EGraph>>| rows.iter().flatten().fold(EGraph::new(), |acc, r| acc.union(r));
    assert_eq!(union(&rows), union(&default_rows));
}

#[test]
fn base_path_rewrites_exactly() {
    let (p, g, universe) = example2();
    let m = materialize(&p, &g, universe).unwrap();
    let c = p.clause(&sym("detectable")).unwrap();
    let engine = Engine::new(&p, universe, EngineConfig::default()).unwrap();
    let d = engine.fwd_or_clause_base(&m, example2_update(), &sym("detectable"), c).unwrap();
    let applied = apply_update(&m, &d);
    assert_eq!(applied.get(&sym("detectable"), Tag::Single), &eg(&[(6, 0), (3, 0), (0, 2), (2, 0), (0, 5)]));
    let again = engine.fwd_or_clause_base(&m, EDelta::empty(), &sym("detectable"), c).unwrap();
    assert!(again.is_empty());
}

#[test]
fn fact_disjunct_on_empty_graph() {
    let mut nodes = NodeTable::new();
    let p = program("s(a,b).", &mut nodes);
    let engine = Engine::new(&p, nodes.universe(), EngineConfig::default()).unwrap();
    let d = engine.fwd_or_clause_base(&LRel::new(), EDelta::empty(), &sym("s"), p.clause(&sym("s")).unwrap()).unwrap();
    assert_eq!(d.add().get(&sym("s"), Tag::Single), &eg(&[(0, 1)]));
}

#[test]
fn deletions_take_the_base_path() {
    let (p, g, universe) = example2();
    let m = materialize(&p, &g, universe).unwrap();
    let mut del = LRel::new();
    del.set(sym("suspect"), Tag::Single, eg(&[(6, 0)]));
    let mut engine = Engine::new(&p, universe, EngineConfig::default().debug()).unwrap();
    let out = engine.maintain(&m, &p.all_symbols(), EDelta::new(LRel::new(), del).unwrap()).unwrap();
    assert_eq!(engine.stats().base_calls, 1);
    assert_eq!(out.del().get(&sym("detectable"), Tag::Single), &eg(&[(6, 0)]));
    let applied = apply_update(&m, &out);
    assert!(sat_program(&applied, &p, &p.all_symbols(), &engine.oracle()).unwrap());
}

#[test]
fn unsupported_views_are_recomputed() {
    let (p, g, universe) = example2();
    let m = materialize(&p, &g, universe).unwrap();
    let mut engine = Engine::new(&p, universe, EngineConfig::default()).unwrap();
    let out = engine.maintain(&m, p.edb_symbols(), example2_update()).unwrap();
    assert_eq!(engine.stats().base_calls, 1);
    assert_eq!(out.add().get(&sym("detectable"), Tag::Single), &eg(&[(0, 2), (2, 0), (0, 5)]));
}

#[test]
fn empty_update_is_a_fixpoint() {
    let (p, g, universe) = example2();
    let m = materialize(&p, &g, universe).unwrap();
    let out = maintain(&p, &m, &p.all_symbols(), EDelta::empty(), universe).unwrap();
    assert!(out.is_empty());
    let mut engine = Engine::new(&p, universe, EngineConfig::default()).unwrap();
    let same = engine.fwd_program(&m, &p.all_symbols(), EDelta::empty(), BTreeSet::new(), &[]).unwrap();
    assert!(same.is_empty());
}

#[test]
fn empty_program_materializes_to_input() {
    let g = edb(&[("e", &[(0, 1)])]);
    assert_eq!(materialize(&Program::default(), &g, Universe(2)).unwrap(), g);
}

#[test]
fn transfer_cycle_is_suspect() {
    let mut nodes = NodeTable::numbered("n", 2);
    let text = "
        suspect(X,Y) :- pstransfer+(X,Y), pstransfer+(Y,X).
        pstransfer(X,Y) :- (transfer | stransfer)(X,Y).
        stransfer(X,Y) :- accredited(Y,X), secures(X,Y), transfer(X,Y).
        secures(X,Y) :- (connected . cmonitored+ . connected)(X,Y).
        cmonitored(X,Y) :- connected(X,Y), monitors+(Z,X), monitors+(Z,Y), accredited(Z,X).
    ";
    let p = program(text, &mut nodes);
    assert_eq!(
        stratify(&p).unwrap().iter().map(Symbol::as_str).collect::<Vec<_>>(),
        vec!["cmonitored", "secures", "stransfer", "pstransfer", "suspect"]
    );
    let g = edb(&[("transfer", &[(0, 1), (1, 0)]), ("monitors", &[(0, 0), (0, 1)])]);
    let m = materialize(&p, &g, nodes.universe()).unwrap();
    assert_eq!(m.get(&sym("suspect"), Tag::Single), &eg(&[(0, 1), (1, 0), (0, 0), (1, 1)]));
}

#[test]
fn updates_to_views_are_rejected() {
    let (p, g, universe) = example2();
    let mut add = LRel::new();
    add.insert(&sym("detectable"), Tag::Single, Node(0), Node(1));
    let err = maintain(&p, &g, &p.all_symbols(), EDelta::additions(add), universe).unwrap_err();
    assert!(matches!(err, EngineError::IntensionalUpdate(_)));
}

#[test]
fn unsatisfied_support_fails_h1() {
    let (p, g, universe) = example2();
    let mut engine = Engine::new(&p, universe, EngineConfig::default().debug()).unwrap();
    let err = engine.maintain(&g, &p.all_symbols(), example2_update()).unwrap_err();
    assert!(matches!(err, EngineError::Hypothesis { id: Hypothesis::H1, .. }), "{err}");
    assert!(err.is_internal());
}

#[test]
fn cyclic_programs_are_rejected() {
    let mut nodes = NodeTable::new();
    let p = program("a(X,Y) :- b(X,Y). b(X,Y) :- a(X,Y).", &mut nodes);
    let err = Engine::new(&p, Universe(0), EngineConfig::default()).unwrap_err();
    assert_eq!(err.to_string(), "program is not stratified: dependency cycle a -> b -> a");
}

#[test]
fn strategies_agree() {
    let (p, g, universe) = example2();
    let seq = Engine::new(&p, universe, EngineConfig::default().with_exec(Exec::Sequential)).unwrap().materialize(&g).unwrap();
    let par = Engine::new(&p, universe, EngineConfig::default().with_exec(Exec::Parallel)).unwrap().materialize(&g).unwrap();
    assert_eq!(seq, par);
}
