//! Synthetic workloads and the full-versus-incremental timing harness.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closure::{close_all, compute_closures_with, ClosureOptions};
use crate::engine::{Engine, EngineConfig, EngineError};
use crate::exec::Exec;
use crate::graph::{apply_update, EDelta, EGraph, LRel};
use crate::node::{Node, NodeTable};
use crate::syntax::{compile_surface, normalize, parse_program, Program, Symbol, Tag};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("configuration file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("query {query} at rho_supp {rho_supp}: incremental and full results differ")]
    Mismatch { query: String, rho_supp: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("graph has no symbols to sample")]
    EmptySelection,
}

/// Out-degree distribution of generated relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Sources drawn uniformly; sparse, low-skew graphs.
    Uniform,
    /// Sources drawn by Zipf rank; a few hubs carry most edges.
    Zipf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub preset: Preset,
    pub node_count: u32,
    pub symbol_count: u32,
    /// Edges per node in each generated relation.
    pub density: f64,
    pub zipf_exponent: f64,
    /// Number of queries in the workload.
    pub workload_size: u32,
    pub rho_supp: Vec<f64>,
    /// Timed runs per measurement; the median is reported.
    pub repetitions: u32,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig::sparse()
    }
}

impl BenchConfig {
    pub fn sparse() -> Self {
        BenchConfig {
            preset: Preset::Uniform,
            node_count: 1000,
            symbol_count: 20,
            density: 0.5,
            zipf_exponent: 1.1,
            workload_size: 10,
            rho_supp: vec![0.05, 0.1, 0.15, 0.2, 0.25],
            repetitions: 5,
            seed: 42,
            parallel: true,
        }
    }

    pub fn dense() -> Self {
        BenchConfig { preset: Preset::Zipf, density: 0.8, ..BenchConfig::sparse() }
    }

    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let cfg: BenchConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let err = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.node_count == 0 || self.symbol_count == 0 || self.workload_size == 0 || self.repetitions == 0 {
            return err("node_count, symbol_count, workload_size and repetitions must be at least 1");
        }
        if !(self.density.is_finite() && self.density >= 0.0) {
            return err("density must be a non-negative number");
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent > 0.0) {
            return err("zipf_exponent must be positive");
        }
        if self.rho_supp.is_empty() || self.rho_supp.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return err("rho_supp must be a non-empty list of fractions in (0, 1]");
        }
        Ok(())
    }

    pub fn exec(&self) -> Exec {
        if self.parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

#[derive(Debug, Clone)]
pub struct Query {
    pub name: String,
    pub text: String,
    pub program: Program,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub nodes: NodeTable,
    /// EDB relations with closures.
    pub edb: LRel,
    pub workload: Vec<Query>,
}

fn edb_name(i: u32) -> String {
    format!("e{i}")
}

fn generate_relation(cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> EGraph {
    let n = cfg.node_count;
    let m = (cfg.density * n as f64).round() as usize;
    let zipf = Zipf::new(n as u64, cfg.zipf_exponent).expect("validated exponent");
    // Hubs land on different nodes in each relation.
    let mut rank_to_node: Vec<u32> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(rank_to_node.as_mut_slice(), rng);
    let mut out = EGraph::new();
    for _ in 0..m {
        let src = match cfg.preset {
            Preset::Uniform => rng.gen_range(0..n),
            Preset::Zipf => rank_to_node[zipf.sample(rng) as usize - 1],
        };
        let dst = rng.gen_range(0..n);
        out.insert(Node(src), Node(dst));
    }
    out
}

fn pick<'a>(rng: &mut ChaCha8Rng, from: &'a [String]) -> &'a str {
    &from[rng.gen_range(0..from.len())]
}

/// One view defined by a random template reading `first` and extensional
/// symbols. Closure is only taken over extensional inputs.
fn template(rng: &mut ChaCha8Rng, v: &str, first: &str, edb: &[String], first_is_view: bool) -> String {
    let b = pick(rng, edb);
    let c = pick(rng, edb);
    let choices = if first_is_view { 2 } else { 4 };
    match rng.gen_range(0..choices) {
        0 => format!("{v}(X,Y) :- {first}(X,Z), {b}(Z,Y).\n"),
        1 => format!("{v}(X,Y) :- {first}(X,Y), {b}(Z,X), {c}(Z,Y).\n"),
        2 => format!("{v}(X,Y) :- ({first}+ | {b})(X,Y).\n"),
        _ => format!("{v}(X,Y) :- ({b} . {first}+)(X,Y).\n"),
    }
}

fn generate_query(i: u32, edb: &[String], rng: &mut ChaCha8Rng) -> String {
    let (q, a, b) = (format!("q{i}"), format!("q{i}_a"), format!("q{i}_b"));
    let first = pick(rng, edb);
    let mut text = template(rng, &a, first, edb, false);
    text += &template(rng, &b, &a, edb, true);
    text += &format!("{q}(X,Y) :- {b}(X,Y).\n");
    text += &format!("{q}(X,Y) :- {a}(X,Y), {}(Y,X).\n", pick(rng, edb));
    text
}

/// Seeded EDB graph and query workload.
pub fn generate_instance(cfg: &BenchConfig) -> Result<Instance, BenchError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nodes = NodeTable::numbered("n", cfg.node_count);
    let mut single = LRel::new();
    for i in 0..cfg.symbol_count {
        single.set(Symbol::new(&edb_name(i)).unwrap(), Tag::Single, generate_relation(cfg, &mut rng));
    }
    let edb = close_all(&single, cfg.exec());
    let names: Vec<String> = (0..cfg.symbol_count).map(edb_name).collect();
    let mut workload = Vec::new();
    for i in 0..cfg.workload_size {
        let text = generate_query(i, &names, &mut rng);
        let mut table = nodes.clone();
        let surface = parse_program(&text).expect("generated query parses");
        let program = normalize(&compile_surface(&surface, &mut table)).expect("generated query is valid");
        workload.push(Query { name: format!("q{i}"), text, program });
    }
    Ok(Instance { nodes, edb, workload })
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub base: LRel,
    pub delta: EDelta,
    pub symbols: BTreeSet<Symbol>,
    /// `100 · |Δ₊| / |base|` over `Single` edges; infinite for an empty base.
    pub rho: f64,
}

/// Moves every edge of a random `rho_supp` share of the symbols from the
/// graph into an additions-only update.
pub fn sample_support_delta(g: &LRel, rho_supp: f64, seed: u64) -> Result<Sample, BenchError> {
    let symbols: Vec<Symbol> = g.symbols().into_iter().collect();
    if symbols.is_empty() {
        return Err(BenchError::EmptySelection);
    }
    let k = ((rho_supp * symbols.len() as f64 - 1e-9).ceil() as usize).clamp(1, symbols.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: BTreeSet<Symbol> = sample(&mut rng, symbols.len(), k).into_iter().map(|i| symbols[i].clone()).collect();
    let mut add = LRel::new();
    let mut base = g.clone();
    for s in &chosen {
        add.set(s.clone(), Tag::Single, g.get(s, Tag::Single).clone());
        base.set(s.clone(), Tag::Single, Default::default());
        base.set(s.clone(), Tag::Plus, Default::default());
    }
    let removed = add.edge_count(Tag::Single);
    let remaining = base.edge_count(Tag::Single);
    let rho = if remaining == 0 { f64::INFINITY } else { 100.0 * removed as f64 / remaining as f64 };
    Ok(Sample { base, delta: EDelta::additions(add), symbols: chosen, rho })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub query: String,
    pub rho_supp: f64,
    pub rho_pct: f64,
    pub fvm_ms: f64,
    pub ivm_ms: f64,
    pub time_gain_ms: f64,
    pub ratio_gain_pct: f64,
    pub outputs_equal: bool,
}

impl BenchRow {
    fn new(query: &str, rho_supp: f64, rho_pct: f64, fvm_ms: f64, ivm_ms: f64, outputs_equal: bool) -> Self {
        let ratio = if fvm_ms > 0.0 { 100.0 - 100.0 * ivm_ms / fvm_ms } else { 0.0 };
        BenchRow {
            query: query.to_string(),
            rho_supp,
            rho_pct,
            fvm_ms,
            ivm_ms,
            time_gain_ms: fvm_ms - ivm_ms,
            ratio_gain_pct: ratio,
            outputs_equal,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        if self.rows.is_empty() {
            out.write_record(["query", "rho_supp", "rho_pct", "fvm_ms", "ivm_ms", "time_gain_ms", "ratio_gain_pct", "outputs_equal"])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, BenchError> {
        let rows = csv::Reader::from_reader(r).deserialize().collect::<Result<_, _>>()?;
        Ok(BenchReport { rows })
    }

    pub fn all_equal(&self) -> bool {
        self.rows.iter().all(|r| r.outputs_equal)
    }

    pub fn median_ratio_gain(&self) -> Option<f64> {
        median(self.rows.iter().map(|r| r.ratio_gain_pct).collect())
    }

    /// Rows with the timing columns zeroed, for determinism checks.
    pub fn without_timings(&self) -> Vec<BenchRow> {
        self.rows.iter().map(|r| BenchRow::new(&r.query, r.rho_supp, r.rho_pct, 0.0, 0.0, r.outputs_equal)).collect()
    }
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { (xs[n / 2 - 1] + xs[n / 2]) / 2.0 })
}

/// Median wall time in milliseconds after one untimed warmup run.
fn time_median<T>(reps: u32, mut f: impl FnMut() -> Result<T, BenchError>) -> Result<(f64, T), BenchError> {
    let mut last = f()?;
    let mut times = Vec::with_capacity(reps as usize);
    for _ in 0..reps {
        let start = Instant::now();
        last = f()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok((median(times).unwrap_or(0.0), last))
}

fn case_seed(seed: u64, query: usize, rho: usize) -> u64 {
    seed ^ ((query as u64 + 1) << 32) ^ (rho as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Times full recomputation against incremental maintenance for every
/// query and `rho_supp`. Stops at the first case whose outputs differ.
pub fn run_bench_on(inst: &Instance, cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let engine_cfg = EngineConfig::default().with_exec(cfg.exec());
    let closure = ClosureOptions { incremental_additions: false, exec: cfg.exec() };
    let universe = inst.nodes.universe();
    let mut report = BenchReport::default();
    for (qi, q) in inst.workload.iter().enumerate() {
        let support = q.program.all_symbols();
        for (ri, &rho_supp) in cfg.rho_supp.iter().enumerate() {
            let sample = sample_support_delta(&inst.edb, rho_supp, case_seed(cfg.seed, qi, ri))?;
            let mut engine = Engine::new(&q.program, universe, engine_cfg)?;
            let materialized = engine.materialize(&sample.base)?;
            let updated_edb = apply_update(&sample.base, &sample.delta);

            let (fvm_ms, full) = time_median(cfg.repetitions, || {
                let mut d = EDelta::empty();
                for s in &sample.symbols {
                    d = compute_closures_with(&updated_edb, d, s, closure);
                }
                let input = apply_update(&updated_edb, &d);
                Ok(engine.materialize(&input)?)
            })?;
            let (ivm_ms, delta) = time_median(cfg.repetitions, || Ok(engine.maintain(&materialized, &support, sample.delta.clone())?))?;

            let equal = apply_update(&materialized, &delta) == full;
            if !equal {
                return Err(BenchError::Mismatch { query: q.name.clone(), rho_supp });
            }
            log::info!("{} rho_supp={rho_supp}: fvm {fvm_ms:.3} ms, ivm {ivm_ms:.3} ms", q.name);
            report.rows.push(BenchRow::new(&q.name, rho_supp, sample.rho, fvm_ms, ivm_ms, equal));
        }
    }
    Ok(report)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let inst = generate_instance(cfg)?;
    run_bench_on(&inst, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchConfig {
        BenchConfig { node_count: 60, symbol_count: 6, workload_size: 3, repetitions: 1, ..BenchConfig::sparse() }
    }

    fn max_out_degree(g: &LRel) -> usize {
        g.iter()
            .filter(|((_, t), _)| *t == Tag::Single)
            .flat_map(|(_, e)| e.sources().map(|a| e.successors(a).count()).collect::<Vec<_>>())
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_instance(&small()).unwrap();
        let b = generate_instance(&small()).unwrap();
        assert_eq!(a.edb, b.edb);
        assert_eq!(a.workload.iter().map(|q| &q.text).collect::<Vec<_>>(), b.workload.iter().map(|q| &q.text).collect::<Vec<_>>());
        assert!(crate::graph::wf_graph(&a.edb));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for cfg in [
            BenchConfig { node_count: 0, ..small() },
            BenchConfig { rho_supp: vec![0.0], ..small() },
            BenchConfig { rho_supp: vec![], ..small() },
            BenchConfig { density: f64::NAN, ..small() },
        ] {
            assert!(matches!(generate_instance(&cfg), Err(BenchError::Config(_))));
        }
    }

    #[test]
    fn zipf_preset_is_skewed() {
        let uniform = generate_instance(&BenchConfig { workload_size: 1, ..BenchConfig::sparse() }).unwrap();
        let zipf = generate_instance(&BenchConfig { preset: Preset::Zipf, workload_size: 1, ..BenchConfig::sparse() }).unwrap();
        assert!(max_out_degree(&zipf.edb) > 3 * max_out_degree(&uniform.edb));
    }

    #[test]
    fn sampling_partitions_the_graph() {
        let inst = generate_instance(&small()).unwrap();
        let s = sample_support_delta(&inst.edb, 0.25, 7).unwrap();
        assert_eq!(s.symbols.len(), 2);
        let back = apply_update(&s.base, &s.delta);
        for sym in inst.edb.symbols() {
            assert_eq!(back.get(&sym, Tag::Single), inst.edb.get(&sym, Tag::Single));
            assert!(s.base.get(&sym, Tag::Single).is_disjoint(s.delta.add().get(&sym, Tag::Single)));
        }
        let all = sample_support_delta(&inst.edb, 1.0, 7).unwrap();
        assert_eq!(all.base.edge_count(Tag::Single), 0);
        assert!(all.rho.is_infinite());
        assert!(matches!(sample_support_delta(&LRel::new(), 0.5, 0), Err(BenchError::EmptySelection)));
    }

    #[test]
    fn small_bench_and_csv_round_trip() {
        let report = run_bench(&small()).unwrap();
        assert_eq!(report.rows.len(), 15);
        assert!(report.all_equal());
        assert!(report.median_ratio_gain().is_some());
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("query,rho_supp,rho_pct,fvm_ms,ivm_ms,time_gain_ms,ratio_gain_pct,outputs_equal\n"));
        let back = BenchReport::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.without_timings(), report.without_timings());
        assert_eq!(run_bench(&small()).unwrap().without_timings(), report.without_timings());
    }

    #[test]
    fn toml_config() {
        let cfg = BenchConfig::from_toml("preset = \"zipf\"\nnode_count = 50\nrho_supp = [0.5]\n").unwrap();
        assert_eq!(cfg.preset, Preset::Zipf);
        assert_eq!(cfg.node_count, 50);
        assert_eq!(cfg.symbol_count, 20);
        assert!(BenchConfig::from_toml("nodes = 3").is_err());
    }
}
