//! Text formats for graphs and updates.
//!
//! A graph file has one edge per line, `src<TAB>label<TAB>dst`; a label
//! ending in `+` names the closure entry of that symbol. An update file
//! prefixes each line with `+` or `-`. Blank lines and lines starting with
//! `#` are ignored.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::closure::transitive_closure_with;
use crate::exec::Exec;
use crate::graph::{EDelta, EGraph, LRel};
use crate::node::{Node, NodeTable};
use crate::syntax::{Symbol, Tag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("closure entry for `{0}` is not the closure of its edges")]
    BadClosure(Symbol),
    #[error("line {line}: edge {src} {label} {dst} is both added and deleted")]
    Conflict { line: usize, src: String, label: String, dst: String },
}

fn records(text: &str, fields: usize) -> impl Iterator<Item = Result<(usize, Vec<&str>), IoError>> {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let parts: Vec<&str> = line.split('\t').map(str::trim).collect();
        if parts.len() != fields || parts.iter().any(|p| p.is_empty()) {
            return Some(Err(IoError::Parse {
                line: i + 1,
                message: format!("expected {fields} tab-separated fields, found {}", parts.len()),
            }));
        }
        Some(Ok((i + 1, parts)))
    })
}

fn label(line: usize, text: &str) -> Result<(Symbol, Tag), IoError> {
    let (name, tag) = match text.strip_suffix('+') {
        Some(name) => (name, Tag::Plus),
        None => (text, Tag::Single),
    };
    let sym = Symbol::new(name).map_err(|e| IoError::Parse { line, message: e.to_string() })?;
    Ok((sym, tag))
}

/// Reads a graph. Symbols without closure lines get their closure
/// computed; symbols with closure lines must list exactly the closure.
pub fn read_edges(text: &str, nodes: &mut NodeTable) -> Result<LRel, IoError> {
    let mut g = LRel::new();
    for rec in records(text, 3) {
        let (line, f) = rec?;
        let (sym, tag) = label(line, f[1])?;
        let (a, b) = (nodes.intern(f[0]), nodes.intern(f[2]));
        g.insert(&sym, tag, a, b);
    }
    close_missing(g, Exec::default())
}

fn close_missing(mut g: LRel, exec: Exec) -> Result<LRel, IoError> {
    let given: BTreeMap<Symbol, bool> = g.symbols().into_iter().map(|s| {
        let has_plus = !g.get(&s, Tag::Plus).is_empty();
        (s, has_plus)
    }).collect();
    for (s, has_plus) in given {
        let closure = transitive_closure_with(g.get(&s, Tag::Single), exec);
        if has_plus {
            if g.get(&s, Tag::Plus) != &closure {
                return Err(IoError::BadClosure(s));
            }
        } else {
            g.set(s, Tag::Plus, closure);
        }
    }
    Ok(g)
}

/// Writes every edge, sorted by label, then source name, then target name.
pub fn write_edges(g: &LRel, nodes: &NodeTable) -> String {
    let mut lines: Vec<(String, &str, &str)> = Vec::new();
    for ((s, tag), edges) in g.iter() {
        let label = match tag {
            Tag::Single => s.to_string(),
            Tag::Plus => format!("{s}+"),
        };
        for (a, b) in edges.iter() {
            lines.push((label.clone(), nodes.name(a), nodes.name(b)));
        }
    }
    lines.sort();
    lines.into_iter().map(|(l, a, b)| format!("{a}\t{l}\t{b}\n")).collect()
}

/// Reads an update batch. Only `Single` entries may be updated.
pub fn read_update(text: &str, nodes: &mut NodeTable) -> Result<EDelta, IoError> {
    let mut add = LRel::new();
    let mut del = LRel::new();
    for rec in records(text, 4) {
        let (line, f) = rec?;
        let (sym, tag) = label(line, f[2])?;
        if tag == Tag::Plus {
            return Err(IoError::Parse { line, message: "closure entries cannot be updated directly".into() });
        }
        let (a, b) = (nodes.intern(f[1]), nodes.intern(f[3]));
        let (target, other) = match f[0] {
            "+" => (&mut add, &del),
            "-" => (&mut del, &add),
            op => return Err(IoError::Parse { line, message: format!("unknown operation `{op}`, expected + or -") }),
        };
        if other.get(&sym, tag).contains(a, b) {
            return Err(IoError::Conflict { line, src: f[1].into(), label: f[2].into(), dst: f[3].into() });
        }
        target.insert(&sym, tag, a, b);
    }
    Ok(EDelta::new(add, del).expect("conflicts are rejected while reading"))
}

pub fn write_update(d: &EDelta, nodes: &NodeTable) -> String {
    let mut lines: Vec<(String, &str, &str, char)> = Vec::new();
    for (op, rel) in [('+', d.add()), ('-', d.del())] {
        for ((s, tag), edges) in rel.iter() {
            let label = match tag {
                Tag::Single => s.to_string(),
                Tag::Plus => format!("{s}+"),
            };
            for (a, b) in edges.iter() {
                lines.push((label.clone(), nodes.name(a), nodes.name(b), op));
            }
        }
    }
    lines.sort();
    lines.into_iter().map(|(l, a, b, op)| format!("{op}\t{a}\t{l}\t{b}\n")).collect()
}

/// Edges of one entry as name pairs, sorted.
pub fn named_edges<'a>(g: &EGraph, nodes: &'a NodeTable) -> Vec<(&'a str, &'a str)> {
    let mut out: Vec<(&str, &str)> = g.iter().map(|(a, b): (Node, Node)| (nodes.name(a), nodes.name(b))).collect();
    out.sort();
    out
}
