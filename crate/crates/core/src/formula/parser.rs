//! Recursive-descent parser for the formula grammar.
//!
//! Quantifiers are written `Ex.`, `Ay.` (or `E x.`) and `E>=3 x.`; a
//! quantifier's body extends as far right as possible. Connectives by
//! decreasing precedence: `!`, `&`, `|`, `->` (right associative), `<->`.
//! Implications and biconditionals are desugared into `!`, `&`, `|`.

use thiserror::Error;

use super::{Formula, FragmentTag, Fragment};
use crate::structure::Signature;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{name}` has arity {expected}, used with {found} arguments")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("formula uses variables {0:?}; the two-variable fragment allows only x and y")]
    TooManyVariables(Vec<String>),
    #[error("counting quantifiers are not allowed in {0:?}")]
    CountingNotAllowed(Fragment),
    #[error("counting index must be at least 1")]
    ZeroCountingIndex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Neq,
    Lt,
    Gt,
    Geq,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    let err = |column: usize, message: String| FormulaError::Syntax { column, message };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let rest = |s: &str| chars[i..].iter().take(s.len()).copied().eq(s.chars());
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = if rest("<->") {
            (Tok::Iff, 3)
        } else if rest("->") {
            (Tok::Implies, 2)
        } else if rest(">=") {
            (Tok::Geq, 2)
        } else if rest("!=") {
            (Tok::Neq, 2)
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| err(col, "number too large".into()))?;
            out.push((Tok::Num(n), col));
            continue;
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '!' | '~' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                _ => return Err(err(col, format!("unexpected character `{c}`"))),
            };
            (t, 1)
        };
        out.push((tok, col));
        i += len;
    }
    Ok(out)
}

struct Parser<'s> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    sig: &'s Signature,
}

enum Quant {
    Exists,
    Forall,
    Count(usize),
}

impl Parser<'_> {
    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.0)
    }

    fn peek(&self) -> Option<&Tok> {
        self.peek_at(0)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax { column: self.column(), message: message.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FormulaError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<String, FormulaError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("expected a variable"),
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            lhs = Formula::or([
                Formula::and([lhs.clone(), rhs.clone()]),
                Formula::and([Formula::not(lhs), Formula::not(rhs)]),
            ]);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(Formula::or([Formula::not(lhs), rhs]));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut parts = vec![self.conjunction()?];
        while self.eat(&Tok::Or) {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::And) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    /// Recognizes a quantifier prefix without consuming anything else.
    fn quantifier(&mut self) -> Result<Option<(Quant, String)>, FormulaError> {
        let Some(Tok::Ident(word)) = self.peek().cloned() else { return Ok(None) };
        let kind = match word.chars().next() {
            Some('E') => Quant::Exists,
            Some('A') => Quant::Forall,
            _ => return Ok(None),
        };
        if word.len() == 1 {
            if matches!(kind, Quant::Exists) && self.peek_at(1) == Some(&Tok::Geq) {
                self.pos += 2;
                let i = match self.peek() {
                    Some(Tok::Num(i)) => *i,
                    _ => return self.error("expected a counting index"),
                };
                if i == 0 {
                    return Err(FormulaError::ZeroCountingIndex);
                }
                self.pos += 1;
                let v = self.ident()?;
                self.expect(Tok::Dot, "`.` after quantified variable")?;
                return Ok(Some((Quant::Count(i), v)));
            }
            if matches!(self.peek_at(1), Some(Tok::Ident(_))) && self.peek_at(2) == Some(&Tok::Dot) {
                self.pos += 1;
                let v = self.ident()?;
                self.pos += 1;
                return Ok(Some((kind, v)));
            }
            return Ok(None);
        }
        if self.peek_at(1) == Some(&Tok::Dot) {
            self.pos += 2;
            return Ok(Some((kind, word[1..].to_string())));
        }
        Ok(None)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat(&Tok::Not) {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if let Some((q, v)) = self.quantifier()? {
            let body = Box::new(self.iff()?);
            return Ok(match q {
                Quant::Exists => Formula::Exists(v, body),
                Quant::Forall => Formula::Forall(v, body),
                Quant::Count(i) => Formula::CountExists(i, v, body),
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        if self.eat(&Tok::LParen) {
            let f = self.iff()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(f);
        }
        let name = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return self.error("expected a formula"),
        };
        self.pos += 1;
        if self.eat(&Tok::LParen) {
            let mut args = vec![self.ident()?];
            while self.eat(&Tok::Comma) {
                args.push(self.ident()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            let ri = self.sig.relation_index(&name).ok_or_else(|| FormulaError::UnknownRelation(name.clone()))?;
            let expected = self.sig.relations()[ri].arity;
            if expected != args.len() {
                return Err(FormulaError::ArityMismatch { name, expected, found: args.len() });
            }
            return Ok(Formula::Relation(name, args));
        }
        match name.as_str() {
            "true" => return Ok(Formula::True),
            "false" => return Ok(Formula::False),
            _ => {}
        }
        let op = self.peek().cloned();
        match op {
            Some(Tok::Eq) | Some(Tok::Neq) | Some(Tok::Lt) | Some(Tok::Gt) => {
                self.pos += 1;
                let rhs = self.ident()?;
                Ok(match op.unwrap() {
                    Tok::Eq => Formula::Equal(name, rhs),
                    Tok::Neq => Formula::Not(Box::new(Formula::Equal(name, rhs))),
                    Tok::Lt => Formula::Less(name, rhs),
                    _ => Formula::Less(rhs, name),
                })
            }
            _ => self.error("expected `=`, `!=`, `<` or `>` after a variable"),
        }
    }
}

/// Parses a formula, checking relation atoms against `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, FormulaError> {
    let toks = lex(text)?;
    let end = text.chars().count() + 1;
    let mut p = Parser { toks, pos: 0, end, sig };
    let f = p.iff()?;
    if p.pos < p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(f)
}

/// Parses and checks membership in a fragment: FO2 and C2 admit only the
/// variables `x` and `y`, and only C2 admits counting quantifiers.
pub fn parse_formula_in(text: &str, sig: &Signature, fragment: Fragment) -> Result<Formula, FormulaError> {
    let f = parse_formula(text, sig)?;
    let tag: FragmentTag = f.fragment();
    if fragment != Fragment::Fo {
        let vars = f.variables();
        if vars.iter().any(|v| v != "x" && v != "y") {
            return Err(FormulaError::TooManyVariables(vars.into_iter().collect()));
        }
        if fragment == Fragment::Fo2 && tag.fragment == Fragment::C2 {
            return Err(FormulaError::CountingNotAllowed(fragment));
        }
    }
    Ok(f)
}
