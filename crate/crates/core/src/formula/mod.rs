//! First-order formulas over a signature and the order symbol `<`, with
//! the two-variable and counting fragments.

mod enumerate;
mod eval;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use enumerate::{enumerate_sentences, EnumerationError, DEFAULT_ENUMERATION_CAP};
pub use eval::{
    check_order_invariance, evaluate, evaluate_sentence, EvalError, InvarianceError, InvarianceMode, InvarianceVerdict,
    Model, DEFAULT_EXHAUSTIVE_BOUND, DEFAULT_TRIALS,
};
pub use parser::{parse_formula, parse_formula_in, FormulaError};

pub type Var = String;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Relation(String, Vec<Var>),
    Equal(Var, Var),
    Less(Var, Var),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    /// `∃^{≥i} v. φ` with `i ≥ 1`.
    CountExists(usize, Var, Box<Formula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Fragment {
    #[serde(rename = "FO")]
    Fo,
    #[serde(rename = "FO2")]
    Fo2,
    #[serde(rename = "C2")]
    C2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FragmentTag {
    pub fragment: Fragment,
    pub uses_order: bool,
}

impl FragmentTag {
    pub fn new(fragment: Fragment, uses_order: bool) -> Self {
        FragmentTag { fragment, uses_order }
    }
}

fn var(name: &str) -> Var {
    name.to_string()
}

impl Formula {
    pub fn rel(name: &str, args: &[&str]) -> Formula {
        Formula::Relation(name.to_string(), args.iter().map(|a| var(a)).collect())
    }

    pub fn eq(a: &str, b: &str) -> Formula {
        Formula::Equal(var(a), var(b))
    }

    pub fn lt(a: &str, b: &str) -> Formula {
        Formula::Less(var(a), var(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Not(inner) => *inner,
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            f => Formula::Not(Box::new(f)),
        }
    }

    /// Conjunction, flattened and deduplicated; `True` for an empty list.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => {
                    for q in inner {
                        if seen.insert(q.clone()) {
                            out.push(q);
                        }
                    }
                }
                p => {
                    if seen.insert(p.clone()) {
                        out.push(p);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction, flattened and deduplicated; `False` for an empty list.
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => {
                    for q in inner {
                        if seen.insert(q.clone()) {
                            out.push(q);
                        }
                    }
                }
                p => {
                    if seen.insert(p.clone()) {
                        out.push(p);
                    }
                }
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(var(v), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(var(v), Box::new(body))
    }

    /// `∃^{≥i}`; an index of 1 yields a plain existential.
    pub fn count_exists(i: usize, v: &str, body: Formula) -> Formula {
        assert!(i >= 1, "counting index must be at least 1");
        if i == 1 {
            Formula::exists(v, body)
        } else {
            Formula::CountExists(i, var(v), Box::new(body))
        }
    }

    /// Maximal number of nested quantifiers along a branch. Counting
    /// quantifiers count as one regardless of their index.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Relation(..) | Formula::Equal(..) | Formula::Less(..) => 0,
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0),
            Formula::Exists(_, f) | Formula::Forall(_, f) | Formula::CountExists(_, _, f) => 1 + f.quantifier_rank(),
        }
    }

    /// Largest counting index; plain quantifiers contribute 1.
    pub fn counting_index(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Relation(..) | Formula::Equal(..) | Formula::Less(..) => 0,
            Formula::Not(f) => f.counting_index(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::counting_index).max().unwrap_or(0),
            Formula::Exists(_, f) | Formula::Forall(_, f) => f.counting_index().max(1),
            Formula::CountExists(i, _, f) => f.counting_index().max(*i),
        }
    }

    /// Every variable occurring anywhere in the formula.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Relation(_, args) => out.extend(args.iter().cloned()),
            Formula::Equal(a, b) | Formula::Less(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
            Formula::Exists(v, f) | Formula::Forall(v, f) | Formula::CountExists(_, v, f) => {
                out.insert(v.clone());
                f.collect_vars(out);
            }
        }
    }

    pub fn free_variables(&self) -> BTreeSet<Var> {
        match self {
            Formula::True | Formula::False => BTreeSet::new(),
            Formula::Relation(_, args) => args.iter().cloned().collect(),
            Formula::Equal(a, b) | Formula::Less(a, b) => [a.clone(), b.clone()].into(),
            Formula::Not(f) => f.free_variables(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().flat_map(Formula::free_variables).collect(),
            Formula::Exists(v, f) | Formula::Forall(v, f) | Formula::CountExists(_, v, f) => {
                let mut s = f.free_variables();
                s.remove(v);
                s
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    pub fn uses_order(&self) -> bool {
        match self {
            Formula::Less(..) => true,
            Formula::True | Formula::False | Formula::Relation(..) | Formula::Equal(..) => false,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) | Formula::CountExists(_, _, f) => {
                f.uses_order()
            }
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::uses_order),
        }
    }

    fn has_counting(&self) -> bool {
        match self {
            Formula::CountExists(..) => true,
            Formula::True | Formula::False | Formula::Relation(..) | Formula::Equal(..) | Formula::Less(..) => false,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.has_counting(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_counting),
        }
    }

    /// Smallest fragment containing the formula.
    pub fn fragment(&self) -> FragmentTag {
        let two_var = self.variables().iter().all(|v| v == "x" || v == "y");
        let fragment = match (two_var, self.has_counting()) {
            (false, _) => Fragment::Fo,
            (true, true) => Fragment::C2,
            (true, false) => Fragment::Fo2,
        };
        FragmentTag { fragment, uses_order: self.uses_order() }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            Formula::Exists(..) | Formula::Forall(..) | Formula::CountExists(..) => 0,
            _ => 4,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, g: &Formula, min: u8) -> fmt::Result {
            if g.precedence() < min {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Relation(name, args) => write!(f, "{}({})", name, args.join(",")),
            Formula::Equal(a, b) => write!(f, "{a}={b}"),
            Formula::Less(a, b) => write!(f, "{a}<{b}"),
            Formula::Not(g) => {
                write!(f, "!")?;
                child(f, g, 3)
            }
            Formula::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    child(f, g, 3)?;
                }
                Ok(())
            }
            Formula::Or(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    child(f, g, 2)?;
                }
                Ok(())
            }
            Formula::Exists(v, g) => write!(f, "E{v}. {g}"),
            Formula::Forall(v, g) => write!(f, "A{v}. {g}"),
            Formula::CountExists(i, v, g) => write!(f, "E>={i} {v}. {g}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Signature;

    fn three_sentence() -> Formula {
        parse_formula("Ex. Ey. (x < y & Ex. y < x)", &Signature::empty()).unwrap()
    }

    #[test]
    fn ranks() {
        assert_eq!(three_sentence().quantifier_rank(), 3);
        assert_eq!(Formula::eq("x", "y").quantifier_rank(), 0);
        let f = Formula::and([Formula::exists("x", Formula::eq("x", "x")), Formula::exists("y", Formula::eq("y", "y"))]);
        assert_eq!(f.quantifier_rank(), 1);
    }

    #[test]
    fn counting_indexes() {
        let f = parse_formula("E>=3 x. x=x", &Signature::empty()).unwrap();
        assert_eq!(f, Formula::CountExists(3, "x".into(), Box::new(Formula::eq("x", "x"))));
        assert_eq!(f.counting_index(), 3);
        assert_eq!(three_sentence().counting_index(), 1);
        assert_eq!(Formula::eq("x", "x").counting_index(), 0);
    }

    #[test]
    fn fragments() {
        assert_eq!(three_sentence().fragment(), FragmentTag::new(Fragment::Fo2, true));
        let f = parse_formula("E>=3 x. x=x", &Signature::empty()).unwrap();
        assert_eq!(f.fragment(), FragmentTag::new(Fragment::C2, false));
        let sig = Signature::graph("E");
        let f = parse_formula("Ex. Ey. Ez. E(x,y) & E(y,z)", &sig).unwrap();
        assert_eq!(f.fragment().fragment, Fragment::Fo);
    }

    #[test]
    fn display_reparses() {
        let sig = Signature::graph("E");
        for text in [
            "Ex. Ey. (x < y & Ex. y < x)",
            "Ax. (E(x,x) -> Ey. !(x=y) & E(x,y))",
            "!(Ex. x=x | Ey. y<y) & E>=2 x. E(x,x)",
            "Ax. Ey. E(x,y) <-> Ey. Ax. E(x,y)",
        ] {
            let f = parse_formula(text, &sig).unwrap();
            let again = parse_formula(&f.to_string(), &sig).unwrap();
            assert_eq!(f, again, "{text} -> {f}");
        }
    }

    #[test]
    fn rank_of_quantified_is_successor() {
        let sig = Signature::graph("E");
        let f = parse_formula("Ax. E(x,y) | Ey. E(y,y)", &sig).unwrap();
        assert_eq!(Formula::exists("y", f.clone()).quantifier_rank(), 1 + f.quantifier_rank());
    }
}
