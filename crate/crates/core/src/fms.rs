//! The `.fms` structure file format.
//!
//! ```text
//! sig { E/2; P/1; c }
//! dom 4
//! E: (0,1) (1,2)
//! P: (3)
//! c = 0
//! ```
//!
//! `#` starts a comment. Whitespace between tokens, including newlines, is
//! insignificant, so `sig{E/2} dom 3 E:(0,1)(1,2)` is a valid file.

use std::fmt::Write as _;

use thiserror::Error;

use crate::structure::{Signature, Structure, StructureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FmsError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: duplicate constant assignment for `{name}`")]
    DuplicateConstant { line: usize, column: usize, name: String },
    #[error("domain must be nonempty")]
    EmptyDomain,
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(usize),
    Sym(char),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, FmsError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let (line, column) = (self.line, self.column);
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_ascii_digit() {
                let mut s = String::new();
                while let Some(&d) = self.chars.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    self.bump();
                }
                let n = s.parse().map_err(|_| FmsError::Syntax { line, column, message: "number too large".into() })?;
                out.push(Spanned { tok: Tok::Num(n), line, column });
            } else if c.is_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(&d) = self.chars.peek().filter(|d| d.is_alphanumeric() || **d == '_') {
                    s.push(d);
                    self.bump();
                }
                out.push(Spanned { tok: Tok::Ident(s), line, column });
            } else if "{}/;,:()=".contains(c) {
                self.bump();
                out.push(Spanned { tok: Tok::Sym(c), line, column });
            } else {
                return Err(FmsError::Syntax { line, column, message: format!("unexpected character `{c}`") });
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.column))
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FmsError> {
        let (line, column) = self.here();
        Err(FmsError::Syntax { line, column, message: message.into() })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), FmsError> {
        match self.peek() {
            Some(Tok::Sym(d)) if *d == c => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error(format!("expected `{c}`")),
        }
    }

    fn expect_ident(&mut self) -> Result<String, FmsError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("expected an identifier"),
        }
    }

    fn expect_num(&mut self) -> Result<usize, FmsError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("expected a number"),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn signature(&mut self) -> Result<Signature, FmsError> {
        if self.expect_ident()? != "sig" {
            self.pos -= 1;
            return self.error("expected `sig`");
        }
        self.expect_sym('{')?;
        let mut relations = Vec::new();
        let mut constants = Vec::new();
        let mut constants_done = false;
        while !self.eat_sym('}') {
            if constants_done {
                return self.error("constants must form the last signature entry");
            }
            let name = self.expect_ident()?;
            if self.eat_sym('/') {
                let arity = self.expect_num()?;
                relations.push((name, arity));
            } else {
                constants.push(name);
                while self.eat_sym(',') {
                    constants.push(self.expect_ident()?);
                }
                constants_done = true;
            }
            if !self.eat_sym(';') {
                self.expect_sym('}')?;
                break;
            }
        }
        Ok(Signature::new(relations, constants)?)
    }

    fn tuple(&mut self) -> Result<Vec<usize>, FmsError> {
        self.expect_sym('(')?;
        let mut t = vec![self.expect_num()?];
        while self.eat_sym(',') {
            t.push(self.expect_num()?);
        }
        self.expect_sym(')')?;
        Ok(t)
    }
}

/// Parses an `.fms` document.
pub fn parse_structure(text: &str) -> Result<Structure, FmsError> {
    let toks = Lexer::new(text).tokens()?;
    let end = toks.last().map_or((1, 1), |t| (t.line, t.column + 1));
    let mut p = Parser { toks, pos: 0, end };
    let sig = p.signature()?;
    match p.next() {
        Some(Tok::Ident(s)) if s == "dom" => {}
        _ => {
            p.pos -= 1;
            return p.error("expected `dom`");
        }
    }
    let n = p.expect_num()?;
    if n == 0 {
        return Err(FmsError::EmptyDomain);
    }
    let mut relations = vec![Vec::new(); sig.relations().len()];
    let mut constants: Vec<Option<usize>> = vec![None; sig.constants().len()];
    while p.peek().is_some() {
        let (line, column) = p.here();
        let name = p.expect_ident()?;
        if let Some(ri) = sig.relation_index(&name) {
            p.expect_sym(':')?;
            while p.peek() == Some(&Tok::Sym('(')) {
                let (tl, tc) = p.here();
                let t = p.tuple()?;
                let arity = sig.relations()[ri].arity;
                if t.len() != arity {
                    return Err(FmsError::Syntax {
                        line: tl,
                        column: tc,
                        message: format!("tuple arity mismatch: `{name}` has arity {arity}, got {}", t.len()),
                    });
                }
                if let Some(&e) = t.iter().find(|&&e| e >= n) {
                    return Err(FmsError::Syntax {
                        line: tl,
                        column: tc,
                        message: format!("element id out of range: {e} (domain size {n})"),
                    });
                }
                relations[ri].push(t);
            }
        } else if let Some(ci) = sig.constant_index(&name) {
            p.expect_sym('=')?;
            let (vl, vc) = p.here();
            let v = p.expect_num()?;
            if v >= n {
                return Err(FmsError::Syntax {
                    line: vl,
                    column: vc,
                    message: format!("element id out of range: {v} (domain size {n})"),
                });
            }
            if constants[ci].replace(v).is_some() {
                return Err(FmsError::DuplicateConstant { line, column, name });
            }
        } else {
            return Err(FmsError::Syntax { line, column, message: format!("unknown symbol `{name}`") });
        }
    }
    let mut cs = Vec::with_capacity(constants.len());
    for (ci, c) in constants.into_iter().enumerate() {
        match c {
            Some(v) => cs.push(v),
            None => return Err(StructureError::MissingConstant(sig.constants()[ci].clone()).into()),
        }
    }
    Ok(Structure::new(sig, n, relations, cs)?)
}

/// Canonical text form: one relation per line, tuples sorted.
pub fn serialize_structure(s: &Structure) -> String {
    let sig = s.signature();
    let mut out = String::from("sig {");
    let mut entries: Vec<String> = sig.relations().iter().map(|r| format!("{}/{}", r.name, r.arity)).collect();
    if !sig.constants().is_empty() {
        entries.push(sig.constants().join(", "));
    }
    if !entries.is_empty() {
        let _ = write!(out, " {} ", entries.join("; "));
    }
    out.push_str("}\n");
    let _ = writeln!(out, "dom {}", s.size());
    for (ri, r) in sig.relations().iter().enumerate() {
        out.push_str(&r.name);
        out.push(':');
        for t in s.tuples(ri) {
            let items: Vec<String> = t.iter().map(|e| e.to_string()).collect();
            let _ = write!(out, " ({})", items.join(","));
        }
        out.push('\n');
    }
    for (name, &c) in sig.constants().iter().zip(s.constants()) {
        let _ = writeln!(out, "{name} = {c}");
    }
    out
}
