//! Sequential against rayon-parallel execution of closure computation,
//! materialization and maintenance on a generated sparse instance.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rdivm::bench::{generate_instance, sample_support_delta, BenchConfig};
use rdivm::closure::transitive_closure_with;
use rdivm::engine::{Engine, EngineConfig};
use rdivm::{Exec, Symbol, Tag};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn config() -> BenchConfig {
    BenchConfig { node_count: 400, workload_size: 3, ..BenchConfig::sparse() }
}

fn closure(c: &mut Criterion) {
    let inst = generate_instance(&config()).unwrap();
    let edges = inst.edb.get(&Symbol::new("e0").unwrap(), Tag::Single).clone();
    let mut group = c.benchmark_group("transitive_closure");
    for (name, exec) in STRATEGIES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| transitive_closure_with(&edges, exec)));
    }
    group.finish();
}

fn engine(c: &mut Criterion) {
    let inst = generate_instance(&config()).unwrap();
    let universe = inst.nodes.universe();
    let query = &inst.workload[0];
    let mut group = c.benchmark_group("engine");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        let cfg = EngineConfig::default().with_exec(exec);
        group.bench_function(BenchmarkId::new("materialize", name), |b| {
            b.iter(|| Engine::new(&query.program, universe, cfg).unwrap().materialize(&inst.edb).unwrap())
        });
        let sample = sample_support_delta(&inst.edb, 0.2, 1).unwrap();
        let base = Engine::new(&query.program, universe, cfg).unwrap().materialize(&sample.base).unwrap();
        group.bench_function(BenchmarkId::new("maintain", name), |b| {
            b.iter(|| {
                Engine::new(&query.program, universe, cfg)
                    .unwrap()
                    .maintain(&base, &query.program.all_symbols(), sample.delta.clone())
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, closure, engine);
criterion_main!(benches);
