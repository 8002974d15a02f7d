use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::solve::{ColorKey, Role, WinningTable};
use super::{solve, GameError, Mode};
use crate::formula::{Formula, Model};
use crate::structure::{AtomicFact, OrderRelation, PairAtomicType, Signature};

fn var(role: Role) -> &'static str {
    match role {
        Role::X => "x",
        Role::Y => "y",
    }
}

fn flip(role: Role) -> Role {
    match role {
        Role::X => Role::Y,
        Role::Y => Role::X,
    }
}

fn fact_formula(sig: &Signature, fact: &AtomicFact, only: Option<&str>) -> Formula {
    match fact {
        AtomicFact::Equal => Formula::eq("x", "y"),
        AtomicFact::Relation(ri, args) => {
            let args: Vec<&str> = args.iter().map(|&y| only.unwrap_or(if y { "y" } else { "x" })).collect();
            Formula::rel(&sig.relations()[*ri].name, &args)
        }
    }
}

/// A literal true under `t` and false under `u`. With `only`, both types
/// describe `(a, a)` and the literal uses that single variable.
fn literal(sig: &Signature, t: &PairAtomicType, u: &PairAtomicType, only: Option<&str>) -> Formula {
    let (ft, fu): (BTreeSet<_>, BTreeSet<_>) = (t.sigma_facts(sig).into_iter().collect(), u.sigma_facts(sig).into_iter().collect());
    if let Some(f) = ft.difference(&fu).next() {
        return fact_formula(sig, f, only);
    }
    if let Some(f) = fu.difference(&ft).next() {
        return Formula::not(fact_formula(sig, f, only));
    }
    match t.order {
        Some(OrderRelation::Less) => Formula::lt("x", "y"),
        Some(OrderRelation::Greater) => Formula::lt("y", "x"),
        _ => Formula::eq("x", "y"),
    }
}

fn at_least(n: usize, v: &str, body: Formula) -> Formula {
    Formula::count_exists(n, v, body)
}

/// `∃^{≥n}` when the first count is larger, its negation otherwise.
fn count_gap(p: u32, q: u32, v: &str, body: Formula) -> Formula {
    if p > q {
        at_least(q as usize + 1, v, body)
    } else {
        Formula::not(at_least(p as usize + 1, v, body))
    }
}

struct Extractor<'a> {
    table: &'a WinningTable,
    sig: Signature,
    memo: HashMap<(bool, usize, u32, u32), Formula>,
}

impl Extractor<'_> {
    /// Formula in the variable of `role`, true on colour `e` and false on
    /// colour `f` at round `r`.
    fn separate(&mut self, role: Role, r: usize, e: u32, f: u32) -> Formula {
        debug_assert_ne!(e, f);
        let key = (role == Role::X, r, e, f);
        if let Some(phi) = self.memo.get(&key) {
            return phi.clone();
        }
        let palette = self.table.palette(role, r);
        let phi = match (&palette.keys[e as usize], &palette.keys[f as usize]) {
            (ColorKey::Base(t), ColorKey::Base(u)) => {
                literal(&self.sig, &self.table.atoms[*t as usize], &self.table.atoms[*u as usize], Some(var(role)))
            }
            (ColorKey::Refined { prev: p, .. }, ColorKey::Refined { prev: q, .. }) if p != q => {
                let (p, q) = (*p, *q);
                self.separate(role, r - 1, p, q)
            }
            (ColorKey::Refined { moves: m, .. }, ColorKey::Refined { moves: n, .. }) => {
                let mut counts: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
                for &(t, g, c) in m {
                    counts.entry((t, g)).or_default().0 = c;
                }
                for &(t, g, c) in n {
                    counts.entry((t, g)).or_default().1 = c;
                }
                let (&item, &(p, q)) = counts.iter().find(|(_, (p, q))| p != q).expect("colours differ");
                let others: Vec<(u32, u32)> = counts.keys().copied().filter(|&o| o != item).collect();
                let chi = Formula::and(others.into_iter().map(|o| self.separate_pair(role, r - 1, item, o)));
                count_gap(p, q, var(flip(role)), chi)
            }
            _ => unreachable!("colours of one round share their shape"),
        };
        self.memo.insert(key, phi.clone());
        phi
    }

    /// Formula in `x, y` separating two move items `(atom, colour of the
    /// moving pebble)` that share the colour of the fixed pebble.
    fn separate_pair(&mut self, role: Role, r: usize, a: (u32, u32), b: (u32, u32)) -> Formula {
        if a.0 != b.0 {
            literal(&self.sig, &self.table.atoms[a.0 as usize], &self.table.atoms[b.0 as usize], None)
        } else {
            self.separate(flip(role), r, a.1, b.1)
        }
    }
}

/// A sentence true in `m0` and false in `m1` of quantifier rank `≤ k` (and
/// counting index `≤` threshold in counting mode), or `None` if the
/// structures agree on all such sentences.
pub fn distinguishing_formula<M: Model>(m0: &M, m1: &M, k: usize, mode: Mode) -> Result<Option<Formula>, GameError> {
    let table = solve(m0, m1, k, mode)?;
    Ok(from_table(&table))
}

pub(crate) fn from_table(table: &WinningTable) -> Option<Formula> {
    let k = table.k;
    if table.sentence_equivalent(k) {
        return None;
    }
    let sig = table.boards[0].structure.signature().clone();
    if !table.sentence_equivalent(0) {
        for (ri, sym) in sig.relations().iter().enumerate() {
            if sym.arity == 0 {
                let h0 = table.boards[0].structure.holds(ri, &[]);
                if h0 != table.boards[1].structure.holds(ri, &[]) {
                    let phi = Formula::rel(&sym.name, &[]);
                    return Some(if h0 { phi } else { Formula::not(phi) });
                }
            }
        }
        unreachable!("rank-0 difference comes from a nullary relation");
    }
    let r = (1..=k).find(|&r| !table.sentence_equivalent(r)).expect("some rank differs");
    let (c0, c1) = (table.census(r - 1, 0), table.census(r - 1, 1));
    let classes: BTreeSet<u32> = c0.keys().chain(c1.keys()).copied().collect();
    let get = |c: &BTreeMap<u32, usize>, e: u32| c.get(&e).copied().unwrap_or(0) as u32;
    let e = *classes.iter().find(|&&e| get(&c0, e) != get(&c1, e)).expect("censuses differ");
    let mut ex = Extractor { table, sig, memo: HashMap::new() };
    let theta = Formula::and(
        classes.iter().filter(|&&f| f != e).map(|&f| ex.separate(Role::X, r - 1, e, f)).collect::<Vec<_>>(),
    );
    Some(count_gap(get(&c0, e), get(&c1, e), "x", theta))
}
