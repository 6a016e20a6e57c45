//! Hand-written lexer and recursive-descent parser for `.rd` program text.
//!
//! ```text
//! program := clause*
//! clause  := ident '(' term ',' term ')' ( ':-' item (',' item)* )? '.'
//! item    := path '(' term ',' term ')' | term '=' term
//! path    := primary postfix*            -- outside parentheses
//! primary := ident | '(' alt ')'
//! alt     := seq ('|' seq)*
//! seq     := path ('.' path)*
//! postfix := '+' | '-' | '*'
//! ```
//! Variables start with an uppercase letter or `_`; any other word or a
//! double-quoted string is a constant. `%` starts a line comment.

use super::{Symbol, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfaceTerm {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathExpr {
    Sym(Symbol),
    Inverse(Box<PathExpr>),
    Plus(Box<PathExpr>),
    Star(Box<PathExpr>),
    Alt(Vec<PathExpr>),
    Seq(Vec<PathExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfaceItem {
    Path { expr: PathExpr, args: (SurfaceTerm, SurfaceTerm) },
    Eq(SurfaceTerm, SurfaceTerm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceClause {
    pub head: Symbol,
    pub args: (SurfaceTerm, SurfaceTerm),
    pub body: Vec<SurfaceItem>,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SurfaceProgram {
    pub clauses: Vec<SurfaceClause>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Turnstile,
    Plus,
    Minus,
    Star,
    Pipe,
    Equals,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Quoted(q) => format!("\"{q}\""),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Turnstile => "`:-`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError::Parse { line, col, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (l, cl) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        let tok = match c {
            '\n' | ' ' | '\t' | '\r' => {
                bump(&mut chars);
                continue;
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '|' => Tok::Pipe,
            '=' => Tok::Equals,
            ':' => {
                bump(&mut chars);
                if chars.peek() != Some(&'-') {
                    return Err(err(l, cl, "expected `:-`"));
                }
                Tok::Turnstile
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        None | Some('\n') => return Err(err(l, cl, "unterminated quoted constant")),
                        Some('"') => break,
                        Some(_) => s.push(bump(&mut chars).unwrap()),
                    }
                }
                Tok::Quoted(s)
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Word(s), line: l, col: cl });
                continue;
            }
            other => return Err(err(l, cl, format!("unexpected character `{other}`"))),
        };
        bump(&mut chars);
        out.push(Spanned { tok, line: l, col: cl });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, context: &str) -> Result<(), SyntaxError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(err(t.line, t.col, format!("expected {} {context}, found {}", want.describe(), t.tok.describe())))
        }
    }

    fn symbol(&mut self) -> Result<Symbol, SyntaxError> {
        let t = self.next();
        match t.tok {
            Tok::Word(w) => Symbol::new(&w).map_err(|_| err(t.line, t.col, format!("`{w}` is not a valid symbol"))),
            other => Err(err(t.line, t.col, format!("expected a symbol, found {}", other.describe()))),
        }
    }

    fn term(&mut self) -> Result<SurfaceTerm, SyntaxError> {
        let t = self.next();
        match t.tok {
            Tok::Word(w) => {
                let first = w.chars().next().unwrap();
                if first.is_ascii_uppercase() || first == '_' {
                    Ok(SurfaceTerm::Var(w))
                } else {
                    Ok(SurfaceTerm::Const(w))
                }
            }
            Tok::Quoted(q) => Ok(SurfaceTerm::Const(q)),
            other => Err(err(t.line, t.col, format!("expected a term, found {}", other.describe()))),
        }
    }

    fn args(&mut self) -> Result<(SurfaceTerm, SurfaceTerm), SyntaxError> {
        self.expect(Tok::LParen, "to open the argument list")?;
        let a = self.term()?;
        self.expect(Tok::Comma, "between arguments (all atoms are binary)")?;
        let b = self.term()?;
        self.expect(Tok::RParen, "to close the argument list")?;
        Ok((a, b))
    }

    fn program(&mut self) -> Result<SurfaceProgram, SyntaxError> {
        let mut clauses = Vec::new();
        while self.peek().tok != Tok::Eof {
            clauses.push(self.clause()?);
        }
        Ok(SurfaceProgram { clauses })
    }

    fn clause(&mut self) -> Result<SurfaceClause, SyntaxError> {
        let start = self.peek().clone();
        let head = self.symbol()?;
        let args = self.args()?;
        let mut body = Vec::new();
        let t = self.next();
        match t.tok {
            Tok::Dot => {}
            Tok::Turnstile => loop {
                body.push(self.item()?);
                let t = self.next();
                match t.tok {
                    Tok::Comma => continue,
                    Tok::Dot => break,
                    other => {
                        return Err(err(t.line, t.col, format!("expected `,` or `.` in clause body, found {}", other.describe())))
                    }
                }
            },
            other => return Err(err(t.line, t.col, format!("expected `:-` or `.` after clause head, found {}", other.describe()))),
        }
        Ok(SurfaceClause { head, args, body, line: start.line, col: start.col })
    }

    fn item(&mut self) -> Result<SurfaceItem, SyntaxError> {
        let is_path = matches!(
            (&self.peek().tok, self.peek_at(1)),
            (Tok::LParen, _) | (Tok::Word(_), Tok::LParen | Tok::Plus | Tok::Minus | Tok::Star)
        );
        if is_path {
            let expr = self.postfix()?;
            let args = self.args()?;
            Ok(SurfaceItem::Path { expr, args })
        } else {
            let a = self.term()?;
            self.expect(Tok::Equals, "in equality literal")?;
            let b = self.term()?;
            Ok(SurfaceItem::Eq(a, b))
        }
    }

    fn postfix(&mut self) -> Result<PathExpr, SyntaxError> {
        let start = self.peek().clone();
        let (mut expr, is_symbol) = match start.tok {
            Tok::LParen => {
                self.next();
                let e = self.alt()?;
                self.expect(Tok::RParen, "to close the path expression")?;
                (e, false)
            }
            _ => (PathExpr::Sym(self.symbol()?), true),
        };
        let (mut inverted, mut closed) = (false, false);
        loop {
            let t = self.peek().clone();
            match t.tok {
                Tok::Minus => {
                    if inverted {
                        return Err(err(t.line, t.col, "malformed operator: repeated `-`"));
                    }
                    inverted = true;
                    expr = PathExpr::Inverse(Box::new(expr));
                }
                Tok::Plus | Tok::Star => {
                    if closed {
                        return Err(err(t.line, t.col, "malformed operator: repeated closure"));
                    }
                    if !is_symbol {
                        return Err(err(t.line, t.col, "closure applies only to a single symbol"));
                    }
                    closed = true;
                    expr = if t.tok == Tok::Plus { PathExpr::Plus(Box::new(expr)) } else { PathExpr::Star(Box::new(expr)) };
                }
                _ => break,
            }
            self.next();
        }
        Ok(expr)
    }

    fn alt(&mut self) -> Result<PathExpr, SyntaxError> {
        let mut arms = vec![self.seq()?];
        while self.peek().tok == Tok::Pipe {
            self.next();
            arms.push(self.seq()?);
        }
        Ok(if arms.len() == 1 { arms.pop().unwrap() } else { PathExpr::Alt(arms) })
    }

    fn seq(&mut self) -> Result<PathExpr, SyntaxError> {
        let mut parts = vec![self.postfix()?];
        while self.peek().tok == Tok::Dot {
            self.next();
            parts.push(self.postfix()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { PathExpr::Seq(parts) })
    }
}

/// Parses `.rd` text, preserving clause order.
pub fn parse_program(text: &str) -> Result<SurfaceProgram, SyntaxError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> PathExpr {
        PathExpr::Sym(Symbol::new(s).unwrap())
    }

    #[test]
    fn parses_suspect_clause() {
        let sp = parse_program("suspect(X,Y) :- pstransfer+(X,Y), pstransfer+(Y,X).").unwrap();
        assert_eq!(sp.clauses.len(), 1);
        let c = &sp.clauses[0];
        assert_eq!(c.head.as_str(), "suspect");
        assert_eq!(c.body.len(), 2);
        for item in &c.body {
            match item {
                SurfaceItem::Path { expr, .. } => assert_eq!(expr, &PathExpr::Plus(Box::new(sym("pstransfer")))),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_program("").unwrap(), SurfaceProgram::default());
        assert_eq!(parse_program("  % only a comment\n").unwrap(), SurfaceProgram::default());
    }

    #[test]
    fn unterminated_atom_is_rejected() {
        match parse_program("v(X,Y) :- r(X,") {
            Err(SyntaxError::Parse { line: 1, col: 15, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_operators() {
        assert!(parse_program("v(X,Y) :- s^(X,Y).").is_err());
        assert!(parse_program("v(X,Y) :- s++(X,Y).").is_err());
        assert!(parse_program("v(X,Y) :- s+*(X,Y).").is_err());
        assert!(parse_program("v(X,Y) :- s--(X,Y).").is_err());
        assert!(parse_program("v(X,Y) :- (a . b)+(X,Y).").is_err());
    }

    #[test]
    fn path_expressions() {
        let sp = parse_program("exposed(X,Z) :- (follows* . endorses)(X,Z).\nr(X,Y) :- (p | p-)(X,Y), X = Y, a = \"B c\".").unwrap();
        match &sp.clauses[0].body[0] {
            SurfaceItem::Path { expr, .. } => {
                assert_eq!(expr, &PathExpr::Seq(vec![PathExpr::Star(Box::new(sym("follows"))), sym("endorses")]))
            }
            other => panic!("unexpected {other:?}"),
        }
        let c = &sp.clauses[1];
        assert_eq!(c.line, 2);
        assert_eq!(c.body[1], SurfaceItem::Eq(SurfaceTerm::Var("X".into()), SurfaceTerm::Var("Y".into())));
        assert_eq!(c.body[2], SurfaceItem::Eq(SurfaceTerm::Const("a".into()), SurfaceTerm::Const("B c".into())));
    }

    #[test]
    fn facts_and_inverse() {
        let sp = parse_program("s(a,b).\np(X,Y) :- s-(X,Y).").unwrap();
        assert!(sp.clauses[0].body.is_empty());
        assert_eq!(sp.clauses[0].args, (SurfaceTerm::Const("a".into()), SurfaceTerm::Const("b".into())));
        match &sp.clauses[1].body[0] {
            SurfaceItem::Path { expr, .. } => assert_eq!(expr, &PathExpr::Inverse(Box::new(sym("s")))),
            other => panic!("unexpected {other:?}"),
        }
    }
}
