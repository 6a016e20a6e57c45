use std::collections::HashMap;
use std::fmt;

/// Dense node identifier. Ordering follows interning order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node(pub u32);

impl Node {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Size of the node universe: nodes are exactly `Node(0) .. Node(len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Universe(pub u32);

impl Universe {
    pub fn len(self) -> usize {
        self.0 as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn nodes(self) -> impl Iterator<Item = Node> + Clone {
        (0..self.0).map(Node)
    }

    pub fn contains(self, n: Node) -> bool {
        n.0 < self.0
    }
}

/// Interner between external node names and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeTable {
    names: Vec<String>,
    index: HashMap<String, Node>,
}

impl NodeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table of `n` nodes named `prefix0 .. prefix{n-1}`.
    pub fn numbered(prefix: &str, n: u32) -> Self {
        let mut table = Self::new();
        for i in 0..n {
            table.intern(&format!("{prefix}{i}"));
        }
        table
    }

    pub fn intern(&mut self, name: &str) -> Node {
        if let Some(&n) = self.index.get(name) {
            return n;
        }
        let n = Node(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), n);
        n
    }

    pub fn get(&self, name: &str) -> Option<Node> {
        self.index.get(name).copied()
    }

    pub fn name(&self, n: Node) -> &str {
        &self.names[n.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn universe(&self) -> Universe {
        Universe(self.names.len() as u32)
    }
}
