//! Regular Datalog evaluation with incremental view maintenance over
//! labeled graphs.
//!
//! Programs are binary Datalog with recursion restricted to transitive
//! closure. [`engine::materialize`] computes all views bottom-up in
//! stratification order; [`engine::maintain`] propagates an update through
//! previously materialized views, using delta matching where the update is
//! purely additive and falling back to full re-evaluation otherwise. The
//! [`semantics`] module is a brute-force satisfaction oracle that shares no
//! evaluation code with the engine.

pub mod bench;
pub mod closure;
pub mod engine;
pub mod exec;
pub mod graph;
pub mod io;
pub mod matching;
pub mod node;
pub mod semantics;
pub mod syntax;

pub use engine::{Engine, EngineConfig, EngineError};
pub use exec::Exec;
pub use graph::{apply_update, EDelta, EGraph, LRel};
pub use node::{Node, NodeTable, Universe};
pub use syntax::{Program, Symbol, Tag};
