//! Finite sentence sets that separate every pair of structures the
//! fragment can separate at a given quantifier rank.
//!
//! A rank-`q` type of `x` is its rank-`(q-1)` type together with, for each
//! cross atomic type `α(x,y)` and rank-`(q-1)` type `χ(y)`, the number of
//! `y` realizing both, capped at the counting index. Sentences of rank `q`
//! are boolean combinations of `∃^{≥i} x. T(x)` for rank-`(q-1)` types `T`,
//! so those generators and their negations suffice.

use thiserror::Error;

use super::{Formula, Fragment, FragmentTag};
use crate::structure::Signature;

pub const DEFAULT_ENUMERATION_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("enumeration would produce more than {cap} types")]
    CapExceeded { cap: usize },
    #[error("only the two-variable fragments can be enumerated")]
    UnsupportedFragment,
    #[error("counting index must be at least 1")]
    ZeroCountingIndex,
}

fn other(v: &str) -> &'static str {
    if v == "x" {
        "y"
    } else {
        "x"
    }
}

/// All sign patterns over a list of literals, as conjunctions.
fn sign_patterns(atoms: &[Formula]) -> Vec<Formula> {
    (0..1usize << atoms.len())
        .map(|mask| {
            Formula::and(atoms.iter().enumerate().map(|(i, a)| {
                if mask >> i & 1 == 1 {
                    a.clone()
                } else {
                    Formula::not(a.clone())
                }
            }))
        })
        .collect()
}

/// Atoms of arity-`r` relations whose arguments are drawn from `{v, w}`,
/// selected by `keep` on the bit pattern (bit set means `w`).
fn atoms(sig: &Signature, v: &str, w: &str, keep: impl Fn(usize, usize) -> bool) -> Vec<Formula> {
    let mut out = Vec::new();
    for r in sig.relations() {
        for mask in 0..1usize << r.arity {
            if keep(mask, r.arity) {
                let args: Vec<&str> = (0..r.arity).map(|i| if mask >> i & 1 == 1 { w } else { v }).collect();
                out.push(Formula::rel(&r.name, &args));
            }
        }
    }
    out
}

struct Enumerator<'a> {
    sig: &'a Signature,
    uses_order: bool,
    count: usize,
    cap: usize,
}

impl Enumerator<'_> {
    /// Rank-0 types of `v`; the empty conjunction is written `v=v`.
    fn unary_types(&self, v: &str) -> Vec<Formula> {
        let lits = atoms(self.sig, v, other(v), |mask, _| mask == 0);
        sign_patterns(&lits)
            .into_iter()
            .map(|f| if f == Formula::True { Formula::eq(v, v) } else { f })
            .collect()
    }

    /// Atomic types of a pair `(v, w)` with `v ≠ w`, omitting the unary parts.
    fn cross_types(&self, v: &str) -> Vec<Formula> {
        let w = other(v);
        let lits = atoms(self.sig, v, w, |mask, arity| mask != 0 && mask != (1 << arity) - 1);
        let base = sign_patterns(&lits);
        let neq = Formula::not(Formula::eq(v, w));
        let orders: Vec<Formula> =
            if self.uses_order { vec![Formula::lt(v, w), Formula::lt(w, v)] } else { vec![Formula::True] };
        let mut out = Vec::new();
        for o in &orders {
            for b in &base {
                out.push(Formula::and([neq.clone(), o.clone(), b.clone()]));
            }
        }
        out
    }

    /// Exactly `j` witnesses for `j < c`, or at least `c`.
    fn count_literals(&self, w: &str, body: &Formula, c: usize) -> Vec<Formula> {
        let at_least = |i: usize| {
            if i == 0 {
                Formula::True
            } else {
                Formula::count_exists(i, w, body.clone())
            }
        };
        (0..=c)
            .map(|j| if j == c { at_least(c) } else { Formula::and([at_least(j), Formula::not(at_least(j + 1))]) })
            .collect()
    }

    fn types(&mut self, v: &str, q: usize, c: usize) -> Result<Vec<Formula>, EnumerationError> {
        let base = self.unary_types(v);
        if q == 0 {
            self.charge(base.len())?;
            return Ok(base);
        }
        let prev = self.types(v, q - 1, c)?;
        let inner = self.types(other(v), q - 1, c)?;
        let cross = self.cross_types(v);
        let slots = cross.len() * inner.len();
        let per = u32::try_from(slots).ok().and_then(|s| (c + 1).checked_pow(s));
        let total = per.and_then(|p| p.checked_mul(prev.len()));
        match total {
            Some(t) => self.charge(t)?,
            None => return Err(EnumerationError::CapExceeded { cap: self.cap }),
        }
        let mut choices: Vec<Vec<Formula>> = Vec::with_capacity(slots);
        for a in &cross {
            for chi in &inner {
                choices.push(self.count_literals(other(v), &Formula::and([a.clone(), chi.clone()]), c));
            }
        }
        let mut out = Vec::new();
        for p in &prev {
            let mut idx = vec![0usize; choices.len()];
            loop {
                let parts = std::iter::once(p.clone()).chain(idx.iter().zip(&choices).map(|(&i, ch)| ch[i].clone()));
                out.push(Formula::and(parts));
                let Some(pos) = (0..idx.len()).find(|&i| idx[i] + 1 < choices[i].len()) else { break };
                idx[pos] += 1;
                idx[..pos].iter_mut().for_each(|i| *i = 0);
            }
        }
        Ok(out)
    }

    fn charge(&mut self, n: usize) -> Result<(), EnumerationError> {
        self.count = self.count.saturating_add(n);
        if self.count > self.cap {
            Err(EnumerationError::CapExceeded { cap: self.cap })
        } else {
            Ok(())
        }
    }
}

/// Sentences of the fragment with rank `qr` (and counting index at most
/// `count_idx` in C2) whose values determine the values of all sentences of
/// that rank. `cap` bounds the number of intermediate types.
pub fn enumerate_sentences(
    sig: &Signature,
    fragment: FragmentTag,
    qr: usize,
    count_idx: usize,
    cap: usize,
) -> Result<Vec<Formula>, EnumerationError> {
    let c = match fragment.fragment {
        Fragment::Fo => return Err(EnumerationError::UnsupportedFragment),
        Fragment::Fo2 => 1,
        Fragment::C2 if count_idx == 0 => return Err(EnumerationError::ZeroCountingIndex),
        Fragment::C2 => count_idx,
    };
    if qr == 0 {
        return Ok(vec![Formula::True, Formula::False]);
    }
    let mut e = Enumerator { sig, uses_order: fragment.uses_order, count: 0, cap };
    let types = e.types("x", qr - 1, c)?;
    let mut out = Vec::with_capacity(types.len() * c * 2);
    for t in types {
        for i in 1..=c {
            let g = Formula::count_exists(i, "x", t.clone());
            out.push(Formula::not(g.clone()));
            out.push(g);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn fo2() -> FragmentTag {
        FragmentTag::new(Fragment::Fo2, false)
    }

    #[test]
    fn examples() {
        let empty = Signature::empty();
        let s = enumerate_sentences(&empty, fo2(), 1, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        let ex = parse_formula("Ex. x=x", &empty).unwrap();
        assert!(s.contains(&ex));
        assert!(s.contains(&Formula::not(ex)));

        let g = Signature::graph("E");
        let s = enumerate_sentences(&g, fo2(), 1, 1, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(s.contains(&parse_formula("Ex. E(x,x)", &g).unwrap()));

        let s = enumerate_sentences(&empty, FragmentTag::new(Fragment::C2, false), 1, 2, DEFAULT_ENUMERATION_CAP)
            .unwrap();
        assert!(s.contains(&parse_formula("E>=2 x. x=x", &empty).unwrap()));
    }

    #[test]
    fn sentences_stay_in_fragment() {
        let g = Signature::graph("E");
        for (frag, order, qr, c) in [(Fragment::Fo2, false, 2, 1), (Fragment::C2, true, 1, 3), (Fragment::C2, false, 2, 2)] {
            for s in enumerate_sentences(&g, FragmentTag::new(frag, order), qr, c, DEFAULT_ENUMERATION_CAP).unwrap() {
                assert!(s.is_sentence());
                assert_eq!(s.quantifier_rank(), qr);
                assert!(s.counting_index() <= c);
                assert!(s.variables().iter().all(|v| v == "x" || v == "y"), "{s}");
            }
        }
    }

    #[test]
    fn sizes_and_cap() {
        let g = Signature::graph("E");
        // 2 unary types times 2^(4 cross types * 2 unary types) rank-1 types.
        assert_eq!(enumerate_sentences(&g, fo2(), 2, 1, DEFAULT_ENUMERATION_CAP).unwrap().len(), 2 * 512);
        assert!(matches!(enumerate_sentences(&g, fo2(), 3, 1, DEFAULT_ENUMERATION_CAP), Err(EnumerationError::CapExceeded { .. })));
        assert_eq!(
            enumerate_sentences(&g, FragmentTag::new(Fragment::Fo, false), 1, 1, 10),
            Err(EnumerationError::UnsupportedFragment)
        );
    }
}
