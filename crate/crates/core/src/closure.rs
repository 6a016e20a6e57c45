//! Transitive closure and the `Plus` maintenance step run after each stratum.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::exec::Exec;
use crate::graph::{lrel_diff, Applied, EDelta, EGraph, LRel};
use crate::node::Node;
use crate::syntax::{Symbol, Tag};

/// Walk `start, steps[0], steps[1], ...`; every consecutive pair must be an
/// edge of the graph the path is checked against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub start: Node,
    pub steps: Vec<Node>,
}

impl Path {
    pub fn end(&self) -> Node {
        *self.steps.last().unwrap_or(&self.start)
    }

    pub fn is_path_in(&self, g: &EGraph) -> bool {
        !self.steps.is_empty()
            && std::iter::once(self.start).chain(self.steps.iter().copied()).zip(self.steps.iter()).all(|(a, &b)| g.contains(a, b))
    }
}

fn reachable_from(g: &EGraph, src: Node) -> Vec<Node> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<Node> = g.successors(src).collect();
    while let Some(x) = queue.pop_front() {
        if seen.insert(x) {
            queue.extend(g.successors(x).filter(|y| !seen.contains(y)));
        }
    }
    seen.into_iter().collect()
}

/// Pairs `(x, y)` joined by a path of length at least one.
pub fn transitive_closure(g: &EGraph) -> EGraph {
    transitive_closure_with(g, Exec::default())
}

/// Per-source BFS; sources are processed in parallel under [`Exec::Parallel`].
pub fn transitive_closure_with(g: &EGraph, exec: Exec) -> EGraph {
    let sources: Vec<Node> = g.sources().collect();
    closure_rows(g, &sources, exec)
        .into_iter()
        .flat_map(|(src, reach)| reach.into_iter().map(move |y| (src, y)))
        .collect()
}

fn closure_rows(g: &EGraph, sources: &[Node], exec: Exec) -> Vec<(Node, Vec<Node>)> {
    exec.map(sources, |&src| (src, reachable_from(g, src)))
}

/// Shortest path from `a` to `b` of length at least one.
pub fn find_path(g: &EGraph, a: Node, b: Node) -> Option<Path> {
    // `None` marks nodes entered directly from `a`.
    let mut parent: HashMap<Node, Option<Node>> = HashMap::new();
    let mut queue = VecDeque::new();
    for y in g.successors(a) {
        parent.insert(y, None);
        queue.push_back(y);
    }
    while let Some(x) = queue.pop_front() {
        if x == b {
            let mut steps = vec![b];
            let mut cur = b;
            while let Some(p) = parent[&cur] {
                steps.push(p);
                cur = p;
            }
            steps.reverse();
            return Some(Path { start: a, steps });
        }
        for y in g.successors(x) {
            if let Entry::Vacant(e) = parent.entry(y) {
                e.insert(Some(x));
                queue.push_back(y);
            }
        }
    }
    None
}

/// `g_plus` is exactly the closure of `g_single`.
///
/// Checked without computing a closure: every `Plus` edge must be witnessed
/// by a path, every `Single` edge must be present, and `Plus` must be closed
/// under extension by one more `Single` edge.
pub fn is_closure(g_single: &EGraph, g_plus: &EGraph) -> bool {
    let sound = g_plus.iter().all(|(a, b)| find_path(g_single, a, b).is_some_and(|p| p.is_path_in(g_single) && p.end() == b));
    sound
        && g_single.is_subset(g_plus)
        && g_plus.iter().all(|(a, b)| g_single.successors(b).all(|c| g_plus.contains(a, c)))
}

/// Settings for [`compute_closures_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClosureOptions {
    /// Extend the existing closure from new edges instead of recomputing it
    /// when the update only adds edges to the symbol.
    pub incremental_additions: bool,
    pub exec: Exec,
}

/// Adjusts `d` at `(s, Plus)` so that the applied graph holds the closure of
/// the applied `(s, Single)` relation.
pub fn compute_closures(g: &LRel, d: EDelta, s: &Symbol) -> EDelta {
    compute_closures_with(g, d, s, ClosureOptions::default())
}

pub fn compute_closures_with(g: &LRel, d: EDelta, s: &Symbol, opts: ClosureOptions) -> EDelta {
    let additions_only = d.del().get(s, Tag::Single).is_empty()
        && d.add().get(s, Tag::Plus).is_empty()
        && d.del().get(s, Tag::Plus).is_empty();
    if opts.incremental_additions && additions_only {
        let new_pairs = incremental_additions(g, &d, s, opts.exec);
        return d.modify(s, Tag::Plus, &new_pairs, &EGraph::new());
    }
    let view = Applied::new(g, &d);
    let single = view.get(s, Tag::Single).to_egraph();
    let current = view.get(s, Tag::Plus).to_egraph();
    let target = transitive_closure_with(&single, opts.exec);
    let (plus, minus) = lrel_diff(&current, &target);
    d.modify(s, Tag::Plus, &plus, &minus)
}

/// New closure pairs caused by `d.add(s, Single)`, assuming `g` is
/// well-formed at `s`. Only sources that reach the tail of a new edge can
/// gain pairs, so only those are re-explored.
fn incremental_additions(g: &LRel, d: &EDelta, s: &Symbol, exec: Exec) -> EGraph {
    let old_plus = g.get(s, Tag::Plus);
    let old_single = g.get(s, Tag::Single);
    let new_edges = d.add().get(s, Tag::Single).difference(old_single);
    if new_edges.is_empty() {
        return EGraph::new();
    }
    let mut affected = BTreeSet::new();
    for (u, _) in new_edges.iter() {
        affected.insert(u);
        affected.extend(old_plus.predecessors(u));
    }
    let single = old_single.union(&new_edges);
    let sources: Vec<Node> = affected.into_iter().collect();
    closure_rows(&single, &sources, exec)
        .into_iter()
        .flat_map(|(src, reach)| reach.into_iter().map(move |y| (src, y)))
        .filter(|&(a, b)| !old_plus.contains(a, b))
        .collect()
}

/// Recomputes every `Plus` entry from its `Single` entry.
pub fn close_all(g: &LRel, exec: Exec) -> LRel {
    let mut out = LRel::new();
    for ((s, t), edges) in g.iter() {
        if *t == Tag::Single {
            out.set(s.clone(), Tag::Single, edges.clone());
            out.set(s.clone(), Tag::Plus, transitive_closure_with(edges, exec));
        }
    }
    out
}
