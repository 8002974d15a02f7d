use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Formula;
use crate::structure::{Element, OrderedStructure, Structure};

pub const DEFAULT_EXHAUSTIVE_BOUND: usize = 8;
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` is free but unbound")]
    UnboundVariable(String),
    #[error("order atom `{0}` evaluated on an unordered structure")]
    OrderOnUnordered(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{name}` has arity {expected}, used with {found} arguments")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("element {element} outside the domain of size {size}")]
    ElementOutOfRange { element: Element, size: usize },
}

/// Something a formula can be evaluated on.
pub trait Model {
    fn structure(&self) -> &Structure;
    /// Position of each element in the linear order, if there is one.
    fn order(&self) -> Option<&[usize]>;
}

impl Model for Structure {
    fn structure(&self) -> &Structure {
        self
    }

    fn order(&self) -> Option<&[usize]> {
        None
    }
}

impl Model for OrderedStructure {
    fn structure(&self) -> &Structure {
        self.base()
    }

    fn order(&self) -> Option<&[usize]> {
        Some(self.positions())
    }
}

enum Quant {
    Exists,
    Forall,
    Count(usize),
}

/// A formula with names resolved to relation indices and variable slots.
enum Compiled {
    Const(bool),
    Rel(usize, Vec<usize>),
    Eq(usize, usize),
    Lt(usize, usize),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
    /// `guard`: a slot whose value `w` confines the relevant witnesses to
    /// `{w} ∪ N(w)`; witnesses outside contribute false for existential
    /// and counting quantifiers and true for universal ones.
    Quant { q: Quant, slot: usize, guard: Option<usize>, body: Box<Compiled> },
}

struct Compiler<'a> {
    s: &'a Structure,
    ordered: bool,
    slots: Vec<String>,
}

impl Compiler<'_> {
    fn slot(&mut self, v: &str) -> usize {
        match self.slots.iter().position(|w| w == v) {
            Some(i) => i,
            None => {
                self.slots.push(v.to_string());
                self.slots.len() - 1
            }
        }
    }

    fn compile(&mut self, f: &Formula) -> Result<Compiled, EvalError> {
        Ok(match f {
            Formula::True => Compiled::Const(true),
            Formula::False => Compiled::Const(false),
            Formula::Relation(name, args) => {
                let sig = self.s.signature();
                let ri = sig.relation_index(name).ok_or_else(|| EvalError::UnknownRelation(name.clone()))?;
                let expected = sig.relations()[ri].arity;
                if expected != args.len() {
                    return Err(EvalError::ArityMismatch { name: name.clone(), expected, found: args.len() });
                }
                Compiled::Rel(ri, args.iter().map(|a| self.slot(a)).collect())
            }
            Formula::Equal(a, b) => Compiled::Eq(self.slot(a), self.slot(b)),
            Formula::Less(a, b) => {
                if !self.ordered {
                    return Err(EvalError::OrderOnUnordered(format!("{a}<{b}")));
                }
                Compiled::Lt(self.slot(a), self.slot(b))
            }
            Formula::Not(g) => Compiled::Not(Box::new(self.compile(g)?)),
            Formula::And(gs) => Compiled::And(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?),
            Formula::Or(gs) => Compiled::Or(gs.iter().map(|g| self.compile(g)).collect::<Result<_, _>>()?),
            Formula::Exists(v, g) | Formula::Forall(v, g) | Formula::CountExists(_, v, g) => {
                let q = match f {
                    Formula::Exists(..) => Quant::Exists,
                    Formula::Forall(..) => Quant::Forall,
                    Formula::CountExists(i, ..) => Quant::Count(*i),
                    _ => unreachable!(),
                };
                let guard_var = match q {
                    Quant::Forall => forall_guard(v, g),
                    _ => exists_guard(v, g),
                };
                let slot = self.slot(v);
                let guard = guard_var.map(|w| self.slot(&w));
                Compiled::Quant { q, slot, guard, body: Box::new(self.compile(g)?) }
            }
        })
    }
}

/// A variable other than `v` that shares an atom with `v`.
fn atom_partner(v: &str, f: &Formula) -> Option<String> {
    match f {
        Formula::Relation(_, args) if args.iter().any(|a| a == v) => args.iter().find(|a| *a != v).cloned(),
        Formula::Equal(a, b) if a == v && b != v => Some(b.clone()),
        Formula::Equal(a, b) if b == v && a != v => Some(a.clone()),
        _ => None,
    }
}

fn exists_guard(v: &str, body: &Formula) -> Option<String> {
    match body {
        Formula::And(gs) => gs.iter().find_map(|g| atom_partner(v, g)),
        g => atom_partner(v, g),
    }
}

fn forall_guard(v: &str, body: &Formula) -> Option<String> {
    let negated = |g: &Formula| match g {
        Formula::Not(a) => atom_partner(v, a),
        _ => None,
    };
    match body {
        Formula::Or(gs) => gs.iter().find_map(negated),
        g => negated(g),
    }
}

struct Evaluator<'a> {
    s: &'a Structure,
    order: Option<&'a [usize]>,
    env: Vec<Element>,
    scratch: Vec<Element>,
}

impl Evaluator<'_> {
    fn eval(&mut self, c: &Compiled) -> bool {
        match c {
            Compiled::Const(b) => *b,
            Compiled::Rel(ri, slots) => {
                self.scratch.clear();
                self.scratch.extend(slots.iter().map(|&i| self.env[i]));
                self.s.holds(*ri, &self.scratch)
            }
            Compiled::Eq(a, b) => self.env[*a] == self.env[*b],
            Compiled::Lt(a, b) => {
                let pos = self.order.expect("order checked at compile time");
                pos[self.env[*a]] < pos[self.env[*b]]
            }
            Compiled::Not(g) => !self.eval(g),
            Compiled::And(gs) => gs.iter().all(|g| self.eval(g)),
            Compiled::Or(gs) => gs.iter().any(|g| self.eval(g)),
            Compiled::Quant { q, slot, guard, body } => {
                let saved = self.env[*slot];
                let result = match guard {
                    Some(w) => {
                        let w = self.env[*w];
                        let s = self.s;
                        self.quantify(q, *slot, body, std::iter::once(w).chain(s.neighbors(w).iter().copied()))
                    }
                    None => self.quantify(q, *slot, body, 0..self.s.size()),
                };
                self.env[*slot] = saved;
                result
            }
        }
    }

    fn quantify(&mut self, q: &Quant, slot: usize, body: &Compiled, candidates: impl Iterator<Item = Element>) -> bool {
        let mut count = 0;
        for a in candidates {
            self.env[slot] = a;
            let holds = self.eval(body);
            match q {
                Quant::Exists if holds => return true,
                Quant::Forall if !holds => return false,
                Quant::Count(i) if holds => {
                    count += 1;
                    if count >= *i {
                        return true;
                    }
                }
                _ => {}
            }
        }
        matches!(q, Quant::Forall)
    }
}

/// Evaluates `f` under `env`, which must bind every free variable.
pub fn evaluate<M: Model + ?Sized>(f: &Formula, model: &M, env: &BTreeMap<String, Element>) -> Result<bool, EvalError> {
    let s = model.structure();
    let order = model.order();
    let mut c = Compiler { s, ordered: order.is_some(), slots: Vec::new() };
    let compiled = c.compile(f)?;
    let mut values = vec![0; c.slots.len()];
    for v in f.free_variables() {
        let &a = env.get(&v).ok_or(EvalError::UnboundVariable(v.clone()))?;
        if a >= s.size() {
            return Err(EvalError::ElementOutOfRange { element: a, size: s.size() });
        }
        values[c.slots.iter().position(|w| *w == v).unwrap()] = a;
    }
    Ok(Evaluator { s, order, env: values, scratch: Vec::new() }.eval(&compiled))
}

pub fn evaluate_sentence<M: Model + ?Sized>(f: &Formula, model: &M) -> Result<bool, EvalError> {
    evaluate(f, model, &BTreeMap::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvarianceMode {
    Exhaustive { bound: usize },
    Sampled { seed: u64, trials: usize },
}

impl Default for InvarianceMode {
    fn default() -> Self {
        InvarianceMode::Exhaustive { bound: DEFAULT_EXHAUSTIVE_BOUND }
    }
}

/// Orders are given as sequences, smallest element first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum InvarianceVerdict {
    InvariantOnS { orders_checked: usize },
    Violated { order1: Vec<Element>, order2: Vec<Element>, value1: bool, value2: bool },
}

impl InvarianceVerdict {
    pub fn is_invariant(&self) -> bool {
        matches!(self, InvarianceVerdict::InvariantOnS { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvarianceError {
    #[error("exhaustive check needs n <= {bound}, structure has {size} elements")]
    BoundExceeded { size: usize, bound: usize },
    #[error("invariance is defined for sentences; free variables {0:?}")]
    NotASentence(Vec<String>),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn value_under(f: &Formula, s: &Structure, sequence: &[Element]) -> Result<bool, InvarianceError> {
    let o = OrderedStructure::from_sequence(s.clone(), sequence.to_vec()).expect("permutation");
    Ok(evaluate_sentence(f, &o)?)
}

/// Next permutation in lexicographic order; false after the last one.
fn next_permutation(p: &mut [Element]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Tests whether a sentence over `σ ∪ {<}` has the same value under every
/// linear order of `s` (exhaustive) or under sampled pairs of orders.
pub fn check_order_invariance(
    f: &Formula,
    s: &Structure,
    mode: InvarianceMode,
) -> Result<InvarianceVerdict, InvarianceError> {
    if !f.is_sentence() {
        return Err(InvarianceError::NotASentence(f.free_variables().into_iter().collect()));
    }
    let n = s.size();
    match mode {
        InvarianceMode::Exhaustive { bound } => {
            if n > bound {
                return Err(InvarianceError::BoundExceeded { size: n, bound });
            }
            let first: Vec<Element> = (0..n).collect();
            let v0 = value_under(f, s, &first)?;
            let mut p = first.clone();
            let mut checked = 1;
            while next_permutation(&mut p) {
                checked += 1;
                let v = value_under(f, s, &p)?;
                if v != v0 {
                    return Ok(InvarianceVerdict::Violated { order1: first, order2: p, value1: v0, value2: v });
                }
            }
            Ok(InvarianceVerdict::InvariantOnS { orders_checked: checked })
        }
        InvarianceMode::Sampled { seed, trials } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a: Vec<Element> = (0..n).collect();
            let mut b = a.clone();
            for _ in 0..trials {
                a.shuffle(&mut rng);
                b.shuffle(&mut rng);
                let (va, vb) = (value_under(f, s, &a)?, value_under(f, s, &b)?);
                if va != vb {
                    return Ok(InvarianceVerdict::Violated { order1: a, order2: b, value1: va, value2: vb });
                }
            }
            Ok(InvarianceVerdict::InvariantOnS { orders_checked: 2 * trials })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::structure::Signature;

    fn three() -> Formula {
        parse_formula("Ex. Ey. (x < y & Ex. y < x)", &Signature::empty()).unwrap()
    }

    #[test]
    fn at_least_three() {
        for n in 1..6 {
            let o = OrderedStructure::identity(Structure::pure_set(n));
            assert_eq!(evaluate_sentence(&three(), &o).unwrap(), n >= 3);
        }
        let f = parse_formula("E>=4 x. x=x", &Signature::empty()).unwrap();
        assert!(!evaluate_sentence(&f, &Structure::pure_set(3)).unwrap());
        assert!(evaluate_sentence(&f, &Structure::pure_set(4)).unwrap());
    }

    #[test]
    fn cycle_has_neighbors() {
        let c4 = Structure::graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)], true).unwrap();
        let f = parse_formula("Ax. Ey. E(x,y)", c4.signature()).unwrap();
        assert!(evaluate_sentence(&f, &c4).unwrap());
        let g = parse_formula("Ax. Ay. (!E(x,y) | !x=y)", c4.signature()).unwrap();
        assert!(evaluate_sentence(&g, &c4).unwrap());
        let h = parse_formula("Ex. E>=3 y. E(x,y)", c4.signature()).unwrap();
        assert!(!evaluate_sentence(&h, &c4).unwrap());
    }

    #[test]
    fn errors() {
        let s = Structure::pure_set(2);
        let f = Formula::eq("x", "y");
        assert_eq!(evaluate_sentence(&f, &s), Err(EvalError::UnboundVariable("x".into())));
        let env = BTreeMap::from([("x".to_string(), 0), ("y".to_string(), 0)]);
        assert_eq!(evaluate(&f, &s, &env), Ok(true));
        assert!(matches!(evaluate_sentence(&three(), &s), Err(EvalError::OrderOnUnordered(_))));
        let env = BTreeMap::from([("x".to_string(), 0), ("y".to_string(), 9)]);
        assert!(matches!(evaluate(&f, &s, &env), Err(EvalError::ElementOutOfRange { .. })));
    }

    #[test]
    fn invariance_examples() {
        for n in 1..=6 {
            let v = check_order_invariance(&three(), &Structure::pure_set(n), InvarianceMode::default()).unwrap();
            assert!(v.is_invariant());
        }
        let min = parse_formula("Ex. Ay. (x=y | x<y)", &Signature::empty()).unwrap();
        assert!(check_order_invariance(&min, &Structure::pure_set(4), InvarianceMode::default()).unwrap().is_invariant());

        let sig = Signature::new([("P", 1)], vec![]).unwrap();
        let s = Structure::new(sig.clone(), 2, vec![vec![vec![0]]], vec![]).unwrap();
        let f = parse_formula("Ex. (P(x) & Ay.(x=y | x<y))", &sig).unwrap();
        let v = check_order_invariance(&f, &s, InvarianceMode::default()).unwrap();
        assert_eq!(v, InvarianceVerdict::Violated { order1: vec![0, 1], order2: vec![1, 0], value1: true, value2: false });
        let sampled = check_order_invariance(&f, &s, InvarianceMode::Sampled { seed: 7, trials: 100 }).unwrap();
        assert!(!sampled.is_invariant());
        assert_eq!(sampled, check_order_invariance(&f, &s, InvarianceMode::Sampled { seed: 7, trials: 100 }).unwrap());
    }

    #[test]
    fn bound_enforced() {
        let r = check_order_invariance(&three(), &Structure::pure_set(9), InvarianceMode::default());
        assert_eq!(r, Err(InvarianceError::BoundExceeded { size: 9, bound: 8 }));
    }

    #[test]
    fn permutations_enumerated() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }
}
