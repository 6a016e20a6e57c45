use std::fmt;

use super::{is_identifier, Atom, CBody, Literal, Program, Tag, Term};
use crate::node::NodeTable;

/// Renders a normalized program as `.rd` text, one clause per disjunct.
/// Parsing the output yields the same program.
pub struct ProgramDisplay<'a> {
    pub program: &'a Program,
    pub nodes: &'a NodeTable,
}

impl<'a> ProgramDisplay<'a> {
    pub fn new(program: &'a Program, nodes: &'a NodeTable) -> Self {
        ProgramDisplay { program, nodes }
    }

    fn term(&self, t: Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match t {
            Term::Var(v) => write!(f, "V{v}"),
            Term::Const(n) => {
                let name = self.nodes.name(n);
                let bare = is_identifier(name) && name.starts_with(|c: char| c.is_ascii_lowercase())
                    || !name.is_empty() && name.chars().all(|c| c.is_ascii_digit());
                if bare {
                    f.write_str(name)
                } else {
                    write!(f, "\"{name}\"")
                }
            }
        }
    }

    fn literal(&self, l: &Literal, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &l.atom {
            Atom::Rel(s, a, b) => {
                write!(f, "{s}{}(", if l.tag == Tag::Plus { "+" } else { "" })?;
                self.term(*a, f)?;
                f.write_str(",")?;
                self.term(*b, f)?;
                f.write_str(")")
            }
            Atom::Eq(a, b) => {
                self.term(*a, f)?;
                f.write_str(" = ")?;
                self.term(*b, f)
            }
        }
    }

    fn body(&self, b: &CBody, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in b.lits.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            self.literal(l, f)?;
        }
        Ok(())
    }
}

impl fmt::Display for ProgramDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, c) in self.program.clauses() {
            for b in &c.bodies {
                write!(f, "{s}(")?;
                self.term(c.head.0, f)?;
                f.write_str(",")?;
                self.term(c.head.1, f)?;
                f.write_str(") :- ")?;
                self.body(b, f)?;
                f.write_str(".\n")?;
            }
        }
        Ok(())
    }
}
