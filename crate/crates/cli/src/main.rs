use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rdivm::bench::{run_bench, BenchConfig, BenchError};
use rdivm::engine::{Engine, EngineConfig, EngineError};
use rdivm::graph::{apply_update, LRel};
use rdivm::io::{named_edges, read_edges, read_update, write_edges};
use rdivm::semantics::{program_violation, OracleConfig};
use rdivm::syntax::{compile_surface, normalize, parse_program, ProgramDisplay};
use rdivm::{EDelta, NodeTable, Program, Symbol, Tag};

#[derive(Parser)]
#[command(name = "rdivm", version, about = "Regular Datalog views with incremental maintenance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, normalize and stratify a program.
    Check {
        #[arg(long)]
        program: PathBuf,
    },
    /// Compute every view from an extensional graph.
    Materialize {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Maintain a materialized graph under one or more update batches.
    Update {
        #[arg(long)]
        program: PathBuf,
        /// Materialized graph, as written by `materialize`.
        #[arg(long)]
        graph: PathBuf,
        /// Treat the graph as extensional input and materialize it first.
        #[arg(long)]
        from_edb: bool,
        #[arg(long, required = true)]
        update: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Print the edges of one relation.
    Query {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        symbol: String,
        #[arg(long, value_enum, default_value_t = TagArg::Single)]
        tag: TagArg,
    },
    /// Check that a graph satisfies every clause of a program.
    Oracle {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = rdivm::semantics::DEFAULT_BUDGET)]
        enum_budget: u64,
    },
    /// Time full recomputation against incremental maintenance.
    Bench {
        /// TOML file with benchmark settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct EngineFlags {
    /// Check the maintenance hypotheses between steps.
    #[arg(long)]
    debug_hypotheses: bool,
    #[arg(long, default_value_t = rdivm::semantics::DEFAULT_BUDGET)]
    enum_budget: u64,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

impl EngineFlags {
    fn config(self) -> EngineConfig {
        let exec = if self.sequential { rdivm::Exec::Sequential } else { rdivm::Exec::default() };
        EngineConfig { debug_hypotheses: self.debug_hypotheses, enum_budget: self.enum_budget, ..EngineConfig::default() }.with_exec(exec)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TagArg {
    Single,
    Plus,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Sparse,
    Dense,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_program(path: &Path, nodes: &mut NodeTable) -> Result<Program> {
    let text = read(path)?;
    let surface = parse_program(&text).with_context(|| format!("parsing {}", path.display()))?;
    let program = normalize(&compile_surface(&surface, nodes)).with_context(|| format!("normalizing {}", path.display()))?;
    Ok(program)
}

fn load_graph(path: &Path, nodes: &mut NodeTable) -> Result<LRel> {
    read_edges(&read(path)?, nodes).with_context(|| format!("reading graph {}", path.display()))
}

fn cmd_check(program: &Path) -> Result<String> {
    let mut nodes = NodeTable::new();
    let p = load_program(program, &mut nodes)?;
    let engine = Engine::new(&p, nodes.universe(), EngineConfig::default())?;
    let mut out = ProgramDisplay::new(&p, &nodes).to_string();
    let order: Vec<&str> = engine.order().iter().map(Symbol::as_str).collect();
    let edb: Vec<&str> = p.edb_symbols().iter().map(Symbol::as_str).collect();
    writeln!(out, "% edb: {}", edb.join(" "))?;
    writeln!(out, "% order: {}", order.join(" "))?;
    Ok(out)
}

fn cmd_materialize(program: &Path, graph: &Path, flags: EngineFlags) -> Result<String> {
    let mut nodes = NodeTable::new();
    let p = load_program(program, &mut nodes)?;
    let g = load_graph(graph, &mut nodes)?;
    let mut engine = Engine::new(&p, nodes.universe(), flags.config())?;
    let m = engine.materialize(&g)?;
    Ok(write_edges(&m, &nodes))
}

fn summary(p: &Program, d: &EDelta) -> String {
    let syms: BTreeSet<Symbol> = p.all_symbols().into_iter().chain(d.keys().into_iter().map(|(s, _)| s)).collect();
    syms.iter()
        .map(|s| format!("{s}: +{} -{}\n", d.add().get(s, Tag::Single).len(), d.del().get(s, Tag::Single).len()))
        .collect()
}

fn cmd_update(program: &Path, graph: &Path, from_edb: bool, updates: &[PathBuf], flags: EngineFlags) -> Result<(String, String)> {
    let mut nodes = NodeTable::new();
    let p = load_program(program, &mut nodes)?;
    let mut g = load_graph(graph, &mut nodes)?;
    if from_edb {
        g = Engine::new(&p, nodes.universe(), flags.config())?.materialize(&g)?;
    }
    let mut report = String::new();
    for path in updates {
        let before = nodes.universe();
        let d = read_update(&read(path)?, &mut nodes).with_context(|| format!("reading update {}", path.display()))?;
        let mut support = p.all_symbols();
        if nodes.universe() != before {
            // New nodes change what variable equalities range over.
            let sensitive = p.universe_sensitive();
            if !sensitive.is_empty() {
                log::info!("update adds nodes; recomputing {} view(s) in full", sensitive.len());
            }
            support.retain(|s| !sensitive.contains(s));
        }
        let mut engine = Engine::new(&p, nodes.universe(), flags.config())?;
        let out = engine.maintain(&g, &support, d)?;
        let stats = engine.stats();
        log::info!("{}: {} delta step(s), {} base step(s)", path.display(), stats.delta_calls, stats.base_calls);
        if updates.len() > 1 {
            writeln!(report, "== {}", path.display())?;
        }
        report += &summary(&p, &out);
        g = apply_update(&g, &out);
    }
    Ok((write_edges(&g, &nodes), report))
}

fn cmd_query(graph: &Path, symbol: &str, tag: TagArg) -> Result<String> {
    let mut nodes = NodeTable::new();
    let g = load_graph(graph, &mut nodes)?;
    let sym = Symbol::new(symbol)?;
    let (tag, label) = match tag {
        TagArg::Single => (Tag::Single, symbol.to_string()),
        TagArg::Plus => (Tag::Plus, format!("{symbol}+")),
    };
    if !g.symbols().contains(&sym) {
        log::warn!("symbol `{symbol}` does not occur in {}", graph.display());
    }
    Ok(named_edges(g.get(&sym, tag), &nodes).into_iter().map(|(a, b)| format!("{a}\t{label}\t{b}\n")).collect())
}

/// Returns the report and whether the graph is a model.
fn cmd_oracle(program: &Path, graph: &Path, budget: u64) -> Result<(String, bool)> {
    let mut nodes = NodeTable::new();
    let p = load_program(program, &mut nodes)?;
    let g = load_graph(graph, &mut nodes)?;
    let cfg = OracleConfig::new(nodes.universe()).with_budget(budget);
    match program_violation(&g, &p, &p.all_symbols(), &cfg)? {
        None => Ok(("PASS\n".into(), true)),
        Some(cex) => {
            let eta: Vec<String> = cex.grounding.0.iter().enumerate().map(|(i, n)| format!("V{i}={}", nodes.name(*n))).collect();
            let text = format!(
                "FAIL {}({},{}) not derived; disjunct {} holds under {}\n",
                cex.symbol,
                nodes.name(cex.head.0),
                nodes.name(cex.head.1),
                cex.disjunct,
                eta.join(" ")
            );
            Ok((text, false))
        }
    }
}

fn cmd_bench(config: Option<&Path>, preset: Option<PresetArg>, seed: Option<u64>) -> Result<String> {
    let mut cfg = match (config, preset) {
        (Some(path), _) => BenchConfig::from_toml(&read(path)?).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(PresetArg::Dense)) => BenchConfig::dense(),
        (None, _) => BenchConfig::sparse(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = run_bench(&cfg)?;
    if let Some(m) = report.median_ratio_gain() {
        eprintln!("median ratio gain: {m:.2}%");
    }
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check { program } => emit(None, &cmd_check(&program)?)?,
        Command::Materialize { program, graph, out, engine } => emit(out.as_deref(), &cmd_materialize(&program, &graph, engine)?)?,
        Command::Update { program, graph, from_edb, update, out, engine } => {
            let (graph_text, report) = cmd_update(&program, &graph, from_edb, &update, engine)?;
            match out {
                Some(path) => {
                    emit(Some(&path), &graph_text)?;
                    print!("{report}");
                }
                None => {
                    eprint!("{report}");
                    print!("{graph_text}");
                }
            }
        }
        Command::Query { graph, symbol, tag } => emit(None, &cmd_query(&graph, &symbol, tag)?)?,
        Command::Oracle { program, graph, enum_budget } => {
            let (text, ok) = cmd_oracle(&program, &graph, enum_budget)?;
            print!("{text}");
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench { config, preset, seed, out } => emit(out.as_deref(), &cmd_bench(config.as_deref(), preset, seed)?)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err.chain().any(|e| {
        e.downcast_ref::<EngineError>().is_some_and(EngineError::is_internal)
            || matches!(e.downcast_ref::<BenchError>(), Some(BenchError::Mismatch { .. }))
            || matches!(e.downcast_ref::<BenchError>(), Some(BenchError::Engine(inner)) if inner.is_internal())
    });
    if internal {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RD_IVM_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
