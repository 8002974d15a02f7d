use super::{boards, Board, GameError, Mode};
use crate::formula::Model;
use crate::structure::Element;

/// Largest domain the explicit solver accepts.
pub const EXPLICIT_BOUND: usize = 8;

/// Winning regions by direct enumeration of configurations, spoiler sets and
/// duplicator replies. Serves as the oracle for [`solve`](super::solve).
#[derive(Debug, Clone)]
pub struct ExplicitTable {
    sizes: [usize; 2],
    /// `w[r][cfg]` over configurations `((a·n₀ + b)·n₁ + c)·n₁ + d`.
    w: Vec<Vec<bool>>,
    sentence: Vec<bool>,
}

impl ExplicitTable {
    pub fn contains(&self, r: usize, pebbles: [(Element, Element); 2]) -> bool {
        self.w[r][self.index(pebbles)]
    }

    fn index(&self, [(a, b), (c, d)]: [(Element, Element); 2]) -> usize {
        let [n0, n1] = self.sizes;
        ((a * n0 + b) * n1 + c) * n1 + d
    }

    pub fn duplicator_wins(&self) -> bool {
        self.w.last().expect("round 0 present").iter().any(|&x| x)
    }

    pub fn sentence_equivalent(&self, r: usize) -> bool {
        self.sentence[r]
    }
}

/// Subsets of `0..n` as bitmasks, by size.
fn subsets(n: usize, size: usize) -> impl Iterator<Item = u32> {
    (0u32..1 << n).filter(move |m| m.count_ones() as usize == size)
}

/// One set move: the spoiler names `S` (up to `c` elements of a side with
/// `ns` elements), the duplicator answers with `S'` of the same size on the
/// other side, then every element of `S'` must be matched by one of `S`.
fn set_round(ns: usize, nt: usize, c: usize, compat: impl Fn(Element, Element) -> bool) -> bool {
    let rows: Vec<u32> =
        (0..nt).map(|t| (0..ns).filter(|&s| compat(s, t)).fold(0u32, |m, s| m | 1 << s)).collect();
    for size in 1..=c.min(ns) {
        for spoiler in subsets(ns, size) {
            let answered = subsets(nt, size).any(|reply| (0..nt).all(|t| reply >> t & 1 == 0 || rows[t] & spoiler != 0));
            if !answered {
                return false;
            }
        }
    }
    true
}

fn both_sides(n: [usize; 2], c: usize, compat: impl Fn(Element, Element) -> bool) -> bool {
    set_round(n[0], n[1], c, &compat) && set_round(n[1], n[0], c, |e, f| compat(f, e))
}

/// Explicit solver for domains of at most [`EXPLICIT_BOUND`] elements.
pub fn solve_explicit<M: Model>(m0: &M, m1: &M, k: usize, mode: Mode) -> Result<ExplicitTable, GameError> {
    let [b0, b1] = boards(m0, m1, mode)?;
    for b in [&b0, &b1] {
        if b.size() > EXPLICIT_BOUND {
            return Err(GameError::BoundExceeded { size: b.size(), bound: EXPLICIT_BOUND });
        }
    }
    let n = [b0.size(), b1.size()];
    let c = mode.threshold();
    let mut table = ExplicitTable { sizes: n, w: Vec::new(), sentence: Vec::new() };
    let total = n[0] * n[0] * n[1] * n[1];
    let mut w0 = vec![false; total];
    for a in 0..n[0] {
        for b in 0..n[0] {
            for cc in 0..n[1] {
                for d in 0..n[1] {
                    w0[table.index([(a, b), (cc, d)])] = b0.atom(a, b) == b1.atom(cc, d);
                }
            }
        }
    }
    table.w.push(w0.clone());
    for r in 0..k {
        let prev = &table.w[r];
        let idx = |p: [(Element, Element); 2]| table.index(p);
        // Moving x with y fixed at (b, d), and the converse.
        let mut move_x = vec![false; n[0] * n[1]];
        let mut move_y = vec![false; n[0] * n[1]];
        for u in 0..n[0] {
            for v in 0..n[1] {
                move_x[u * n[1] + v] = both_sides(n, c, |e, f| prev[idx([(e, u), (f, v)])]);
                move_y[u * n[1] + v] = both_sides(n, c, |e, f| prev[idx([(u, e), (v, f)])]);
            }
        }
        let mut next = vec![false; total];
        for a in 0..n[0] {
            for b in 0..n[0] {
                for cc in 0..n[1] {
                    for d in 0..n[1] {
                        let i = idx([(a, b), (cc, d)]);
                        next[i] = w0[i] && move_x[b * n[1] + d] && move_y[a * n[1] + cc];
                    }
                }
            }
        }
        table.w.push(next);
    }
    // Games starting with only x on the board.
    let single0: Vec<bool> =
        (0..n[0] * n[1]).map(|i| b0.atom(i / n[1], i / n[1]) == b1.atom(i % n[1], i % n[1])).collect();
    let mut single = vec![single0.clone()];
    for r in 0..k.saturating_sub(1) {
        let relocate = both_sides(n, c, |e, f| single[r][e * n[1] + f]);
        let w = &table.w[r];
        let next = (0..n[0] * n[1])
            .map(|i| {
                let (a, cc) = (i / n[1], i % n[1]);
                single0[i] && relocate && both_sides(n, c, |e, f| w[table.index([(a, e), (cc, f)])])
            })
            .collect();
        single.push(next);
    }
    table.sentence.push(nullary(&b0) == nullary(&b1));
    for r in 1..=k {
        let ok = table.sentence[r - 1] && both_sides(n, c, |e, f| single[r - 1][e * n[1] + f]);
        table.sentence.push(ok);
    }
    Ok(table)
}

fn nullary(b: &Board) -> Vec<bool> {
    let sig = b.structure.signature();
    (0..sig.relations().len()).filter(|&ri| sig.relations()[ri].arity == 0).map(|ri| b.structure.holds(ri, &[])).collect()
}
